import csv

import numpy as np
import pytest
from click.testing import CliRunner

from eigentropy import experiment
from eigentropy.cli import main
from eigentropy.experiment import (
    ConfigError,
    ExperimentConfig,
    cache_path,
    config_from_csv,
    load_config,
    parse_config,
    read_csv,
    run_entropy_curve,
    run_entropy_profile,
    run_eth_check,
    run_fluctuations,
    run_spectrum,
)


def _small(tmp_path, **kw):
    base = dict(N=10, Np=4, k=1, m=3, n=8, seed=5, cache_dir=str(tmp_path / "cache"),
                out_dir=str(tmp_path / "out"))
    base.update(kw)
    return ExperimentConfig(**base)


def test_parse_config_types():
    values = parse_config("""
        # comment line
        statistics = fermion
        N = 12   # trailing comment
        k = full
        tp = 0.5
        modes = eigenstate, microcanonical
        m_range = 1-3, 7
        sweep_couplings = 0.96:0.96, 0:0
    """)
    assert values == {"statistics": "fermion", "N": 12, "k": None, "tp": 0.5,
                      "modes": ("eigenstate", "microcanonical"), "m_range": (1, 2, 3, 7),
                      "sweep_couplings": ((0.96, 0.96), (0.0, 0.0))}


@pytest.mark.parametrize("text", ["Nsites = 12", "N 12", "N = twelve"])
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(modes=("random",), seed=None)
    with pytest.raises(ConfigError):
        ExperimentConfig(N=4, tp=0.96)
    with pytest.raises(ConfigError):
        ExperimentConfig(m=16, seed=1)


def test_load_config_layering(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("N = 18\nseed = 3\n")
    cfg = load_config(path, "integrable-n16", seed=9)
    assert (cfg.N, cfg.tp, cfg.Vp, cfg.seed) == (18, 0.0, 0.0, 9)
    with pytest.raises(ConfigError):
        load_config(preset="no-such-preset")


def test_cache_key_covers_couplings(tmp_path):
    cfg = _small(tmp_path)
    a = cache_path(tmp_path, cfg.params())
    assert a == cache_path(tmp_path, cfg.params())
    for change in (dict(tp=0.95), dict(Vp=0.0), dict(t=1.1), dict(V=0.9), dict(k=2),
                   dict(statistics="fermion"), dict(Np=3)):
        assert cache_path(tmp_path, cfg.params(**change)) != a


def test_spectrum_cache_hit(tmp_path):
    cfg = _small(tmp_path)
    first = run_spectrum(cfg)
    second = run_spectrum(cfg)
    assert not first.cache_hit and second.cache_hit
    assert (first.dim, first.e_min, first.e_max) == (second.dim, second.e_min, second.e_max)


def test_spectrum_tiny_sector(tmp_path):
    cfg = ExperimentConfig(N=4, Np=2, k=0, tp=0.0, Vp=0.0, m=2, n=1, modes=("eigenstate",))
    assert run_spectrum(cfg).dim == 2


def test_entropy_curve_csv(tmp_path):
    cfg = _small(tmp_path)
    path = run_entropy_curve(cfg)
    header, rows = read_csv(path)
    assert header == ["level_index", "energy", "S_eigenstate", "S_smoothed_8", "S_micro_8",
                      "S_random_8", "m"]
    dim = run_spectrum(cfg).dim
    assert len(rows) == dim
    S = np.array([[float(x) for x in r[2:6]] for r in rows])
    assert np.all(S >= 0)
    # 17 significant digits round-trip exactly
    ep, _ = experiment.obtain_eigenpairs(cfg.params(), cfg.cache_dir)
    assert [float(r[1]) for r in rows] == list(ep.energies)


def test_toy_entropy_curve(tmp_path):
    cfg = ExperimentConfig(N=4, Np=2, k=0, tp=0.0, Vp=0.0, m=2, n=1,
                           modes=("eigenstate", "microcanonical"), out_dir=str(tmp_path))
    header, rows = read_csv(run_entropy_curve(cfg))
    assert len(rows) == 2
    col = header.index("S_micro_1")
    assert all(r[col] == r[2] for r in rows)


def test_csv_header_round_trip(tmp_path):
    cfg = _small(tmp_path)
    path = run_entropy_curve(cfg)
    back = config_from_csv(path)
    assert back == ExperimentConfig(**{**cfg.__dict__, "cache_dir": None, "out_dir": "."})
    rerun = load_config(path, out_dir=str(tmp_path / "again"))
    assert run_entropy_curve(rerun).read_bytes() == path.read_bytes()


def test_entropy_curve_deterministic(tmp_path):
    a = run_entropy_curve(_small(tmp_path, out_dir=str(tmp_path / "a")))
    b = run_entropy_curve(_small(tmp_path, out_dir=str(tmp_path / "b"), cache_dir=None))
    assert a.read_bytes() == b.read_bytes()


def test_entropy_profile_csv(tmp_path):
    path = run_entropy_profile(_small(tmp_path, level=3))
    header, rows = read_csv(path)
    assert header == ["m", "S"]
    S = [float(r[1]) for r in rows]
    assert np.allclose(S, S[::-1], atol=1e-10)
    assert "# @slope = " in path.read_text()


def test_eth_check_csv(tmp_path):
    header, rows = read_csv(run_eth_check(_small(tmp_path)))
    assert header == ["level_index", "energy", "O_eigenstate", "O_micro_8", "n0"]
    assert all(abs(float(r[4]) - 0.4) < 1e-10 for r in rows)


def test_fluctuations_skip_small(tmp_path, caplog):
    cfg = _small(tmp_path, N_list=(8, 10), Np=3, n=12)
    header, rows = read_csv(run_fluctuations(cfg))
    assert [r[2] for r in rows] == ["10"]
    assert "skipping" in caplog.text


def test_fluctuations_workers(tmp_path):
    cfg = _small(tmp_path, N_list=(9, 10), sweep_statistics=("boson", "fermion"))
    serial = run_fluctuations(cfg).read_bytes()
    parallel = run_fluctuations(cfg, workers=2).read_bytes()
    assert serial == parallel


def test_scaling_sweep_rows(sweep_csv):
    with open(sweep_csv) as fh:
        rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
    assert len(rows) == 12
    assert {(r["statistics"], r["integrable_flag"]) for r in rows} == {
        ("boson", "0"), ("boson", "1"), ("fermion", "0"), ("fermion", "1")}
    assert sorted({int(r["N"]) for r in rows}) == [16, 18, 20]


# --- command line -----------------------------------------------------------


def test_cli_spectrum_and_cache_hit(tmp_path):
    runner = CliRunner()
    cfg = tmp_path / "toy.cfg"
    cfg.write_text("N = 4\nNp = 2\nk = 0\ntp = 0\nVp = 0\nm = 2\nn = 1\nmodes = eigenstate\n")
    args = ["spectrum", "--config", str(cfg), "--cache", str(tmp_path / "c")]
    first = runner.invoke(main, args)
    assert first.exit_code == 0, first.output
    assert first.output.startswith("dim=2 ")
    assert "cache=miss" in first.output
    assert "cache=hit" in runner.invoke(main, args).output


def test_cli_tampered_cache(tmp_path):
    runner = CliRunner()
    args = ["spectrum", "--preset", "nonintegrable-n16", "--cache", str(tmp_path)]
    assert runner.invoke(main, args).exit_code == 0
    (path,) = tmp_path.glob("*.eigc")
    data = bytearray(path.read_bytes())
    data[1000] ^= 1
    path.write_bytes(bytes(data))
    result = runner.invoke(main, args)
    assert result.exit_code == 4
    assert "checksum" in result.output


def test_cli_config_error(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("Nsites = 3\n")
    result = CliRunner().invoke(main, ["spectrum", "--config", str(cfg)])
    assert result.exit_code == 2


def test_cli_solver_error(tmp_path, monkeypatch):
    from eigentropy.spectrum import DiagonalizationError

    def boom(p, check=False):
        raise DiagonalizationError("no convergence", residual=1.0)

    monkeypatch.setattr(experiment, "solve", boom)
    result = CliRunner().invoke(main, ["spectrum", "--preset", "nonintegrable-n16"])
    assert result.exit_code == 3


def test_cli_entropy_curve_seed_override(tmp_path):
    runner = CliRunner()
    base = ["entropy-curve", "--preset", "nonintegrable-n16", "--cache", str(tmp_path / "c")]
    a = runner.invoke(main, base + ["--out", str(tmp_path / "a"), "--seed", "1"])
    b = runner.invoke(main, base + ["--out", str(tmp_path / "b"), "--seed", "2"])
    assert a.exit_code == 0 and b.exit_code == 0
    pa, pb = (next((tmp_path / d).glob("*.csv")) for d in "ab")
    assert "# seed = 1" in pa.read_text()
    assert pa.read_bytes() != pb.read_bytes()


@pytest.mark.parametrize("command", ["entropy-profile", "eth-check", "fluctuations"])
def test_cli_other_commands(tmp_path, command):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("N = 10\nNp = 4\nm = 3\nn = 8\nseed = 2\nN_list = 9, 10\n")
    result = CliRunner().invoke(main, [command, "--config", str(cfg), "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert result.output.strip().endswith(".csv")
