"""Experiment configuration, eigenpair caching and CSV writers.

Config files are flat ``key = value`` text; ``#`` starts a comment and
unknown keys are rejected. Every CSV written here starts with ``#`` header
lines: ``# key = value`` for each config field (enough to rerun the
experiment via :func:`config_from_csv`) and ``# @name = value`` for
provenance such as the random generator and package version.
"""

from __future__ import annotations

import hashlib
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    Mode,
    eigenstate_entropies,
    entropy_vs_subsystem,
    eth_observable_check,
    fluctuation_from_entropies,
    mode_entropies,
)
from .ensembles import GENERATOR
from .model import INTEGRABLE, NONINTEGRABLE, ModelParams
from .spectrum import (
    FORMAT_VERSION,
    CacheError,
    EigenPairs,
    load_eigenpairs,
    save_eigenpairs,
    solve,
)

log = logging.getLogger(__name__)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "SpectrumSummary",
    "PRESETS",
    "parse_config",
    "load_config",
    "config_from_csv",
    "format_config",
    "cache_path",
    "run_spectrum",
    "run_entropy_curve",
    "run_entropy_profile",
    "run_fluctuations",
    "run_eth_check",
]


class ConfigError(ValueError):
    pass


def _int_list(text: str) -> tuple[int, ...]:
    out: list[int] = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return tuple(out)


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


def _couplings(text: str) -> tuple[tuple[float, float], ...]:
    pairs = []
    for part in _str_list(text):
        tp, _, vp = part.partition(":")
        pairs.append((float(tp), float(vp)))
    return tuple(pairs)


def _optional_int(text: str) -> int | None:
    return None if text.strip().lower() in ("", "none", "full") else int(text)


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return ", ".join(f"{a!r}:{b!r}" for a, b in value)
        return ", ".join(str(v) for v in value)
    return str(value)


@dataclass(frozen=True)
class ExperimentConfig:
    statistics: str = "boson"
    t: float = 1.0
    V: float = 1.0
    tp: float = NONINTEGRABLE["tp"]
    Vp: float = NONINTEGRABLE["Vp"]
    N: int = 16
    Np: int = 6
    k: int | None = 1
    m: int = 4
    m_range: tuple[int, ...] | None = None
    level: int | None = None
    n: int = 100
    modes: tuple[str, ...] = ("eigenstate", "smoothed", "microcanonical", "random")
    seed: int | None = None
    observable: str = "n0n1"
    N_list: tuple[int, ...] | None = None
    sweep_statistics: tuple[str, ...] | None = None
    sweep_couplings: tuple[tuple[float, float], ...] | None = None
    cache_dir: str | None = field(default=None, metadata={"header": False})
    out_dir: str = field(default=".", metadata={"header": False})

    def __post_init__(self):
        try:
            self.params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.n < 1:
            raise ConfigError("window width n must be >= 1")
        bad = set(self.modes) - set(Mode.KINDS)
        if bad:
            raise ConfigError(f"unknown modes {sorted(bad)}")
        if "random" in self.modes and self.seed is None:
            raise ConfigError("a seed is required when the random mode is requested")
        if not 1 <= self.m <= self.N - 1:
            raise ConfigError(f"subsystem size m={self.m} outside [1, {self.N - 1}]")

    def params(self, **overrides) -> ModelParams:
        base = dict(N=self.N, Np=self.Np, statistics=self.statistics, t=self.t, V=self.V,
                    tp=self.tp, Vp=self.Vp, k=self.k)
        base.update(overrides)
        return ModelParams(**base)


_PARSERS = {
    "statistics": str.strip,
    "t": float, "V": float, "tp": float, "Vp": float,
    "N": int, "Np": int, "k": _optional_int, "m": int,
    "m_range": _int_list, "level": _optional_int, "n": int,
    "modes": _str_list, "seed": _optional_int, "observable": str.strip,
    "N_list": _int_list, "sweep_statistics": _str_list, "sweep_couplings": _couplings,
    "cache_dir": str.strip, "out_dir": str.strip,
}

PRESETS: dict[str, dict] = {
    "nonintegrable-n16": dict(statistics="boson", N=16, Np=6, k=1, m=4, n=100, seed=20100,
                             **NONINTEGRABLE),
    "integrable-n16": dict(statistics="boson", N=16, Np=6, k=1, m=4, n=100, seed=20100,
                                  **INTEGRABLE),
    "scaling-sweep": dict(statistics="boson", N=16, Np=6, k=1, m=4, n=100, seed=20100,
                             N_list=(16, 18, 20), sweep_statistics=("boson", "fermion"),
                             sweep_couplings=((NONINTEGRABLE["tp"], NONINTEGRABLE["Vp"]),
                                              (INTEGRABLE["tp"], INTEGRABLE["Vp"])),
                             **NONINTEGRABLE),
}


def parse_config(text: str, base: dict | None = None) -> dict:
    """Parse ``key = value`` lines into a dict of typed values layered over ``base``."""
    values = dict(base or {})
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if value.strip().lower() == "none":
            values[key] = None
            continue
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value.strip()!r}") from exc
    return values


def _build(values: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path=None, preset: str | None = None, **overrides) -> ExperimentConfig:
    """Preset, then config file, then keyword overrides (``None`` overrides are ignored).

    A CSV produced by this module is accepted as a config file: its header
    lines are read back.
    """
    values: dict = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        values.update(PRESETS[preset])
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if Path(path).suffix == ".csv":
            text = _header_text(text)
        values = parse_config(text, values)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return _build(values)


def _header_text(text: str) -> str:
    lines = []
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        body = line[1:].strip()
        if body and not body.startswith("@"):
            lines.append(body)
    return "\n".join(lines)


def config_from_csv(path) -> ExperimentConfig:
    return _build(parse_config(_header_text(Path(path).read_text())))


def format_config(cfg: ExperimentConfig) -> list[str]:
    return [f"{f.name} = {_fmt(getattr(cfg, f.name))}"
            for f in fields(cfg) if f.metadata.get("header", True)]


def _write_csv(path: Path, cfg: ExperimentConfig, columns, rows, extra=()) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {line}" for line in format_config(cfg)]
    lines += [f"# @{key} = {value}" for key, value in extra]
    lines += [f"# @generator = {GENERATOR}", f"# @code_version = {__version__}"]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def _cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectrumSummary:
    dim: int
    e_min: float
    e_max: float
    wall: float
    cache_hit: bool
    path: Path | None

    def line(self) -> str:
        where = f" cache={'hit' if self.cache_hit else 'miss'}" if self.path else ""
        return (f"dim={self.dim} E_min={self.e_min:.12g} E_max={self.e_max:.12g} "
                f"wall={self.wall:.3f}s{where}")


def cache_key(p: ModelParams) -> str:
    k = "full" if p.k is None else p.k
    text = (f"{p.statistics}|{p.N}|{p.Np}|{k}|{p.t!r}|{p.V!r}|{p.tp!r}|{p.Vp!r}"
            f"|v{FORMAT_VERSION}")
    return hashlib.sha256(text.encode()).hexdigest()


def cache_path(cache_dir, p: ModelParams) -> Path:
    k = "full" if p.k is None else f"k{p.k}"
    name = f"{p.statistics}-N{p.N}-Np{p.Np}-{k}-{cache_key(p)[:16]}.eigc"
    return Path(cache_dir) / name


def obtain_eigenpairs(p: ModelParams, cache_dir=None) -> tuple[EigenPairs, SpectrumSummary]:
    """Load eigenpairs from the cache or diagonalize and store them.

    A missing cache file triggers a solve; an unreadable one raises
    :class:`CacheError`.
    """
    start = time.perf_counter()
    path = cache_path(cache_dir, p) if cache_dir is not None else None
    hit = False
    if path is not None and path.exists():
        ep = load_eigenpairs(path)
        if ep.params != p:
            raise CacheError(f"{path}: cached parameters {ep.params} differ from {p}")
        hit = True
    else:
        ep = solve(p)
        if path is not None:
            save_eigenpairs(ep, path)
    wall = time.perf_counter() - start
    e = ep.energies
    summary = SpectrumSummary(ep.dim, float(e[0]) if len(e) else float("nan"),
                              float(e[-1]) if len(e) else float("nan"), wall, hit, path)
    return ep, summary


def run_spectrum(cfg: ExperimentConfig) -> SpectrumSummary:
    _, summary = obtain_eigenpairs(cfg.params(), cfg.cache_dir)
    log.info("spectrum %s", summary.line())
    return summary


# ---------------------------------------------------------------------------
# analyses
# ---------------------------------------------------------------------------

def _stem(cfg: ExperimentConfig, kind: str) -> str:
    p = cfg.params()
    k = "full" if p.k is None else f"k{p.k}"
    return f"{kind}-{p.statistics}-N{p.N}-Np{p.Np}-{k}-tp{p.tp:g}-Vp{p.Vp:g}-m{cfg.m}"


def run_entropy_curve(cfg: ExperimentConfig) -> Path:
    ep, _ = obtain_eigenpairs(cfg.params(), cfg.cache_dir)
    n = cfg.n
    if n > ep.dim:
        raise ConfigError(f"window n={n} exceeds sector dimension {ep.dim}")
    eigen = eigenstate_entropies(ep, cfg.m)
    columns = ["level_index", "energy", "S_eigenstate"]
    series = [eigen]
    for kind, label in (("smoothed", "S_smoothed"), ("microcanonical", "S_micro"),
                        ("random", "S_random")):
        if kind in cfg.modes:
            columns.append(f"{label}_{n}")
            series.append(mode_entropies(ep, cfg.m, Mode(kind, n, cfg.seed if kind == "random" else None),
                                         eigen))
    columns.append("m")
    rows = [(i, ep.energies[i], *(s[i] for s in series), cfg.m) for i in range(ep.dim)]
    out = Path(cfg.out_dir) / f"{_stem(cfg, 'entropy-curve')}-n{n}.csv"
    return _write_csv(out, cfg, columns, rows, [("schema", "entropy-curve"), ("dim", ep.dim)])


def run_entropy_profile(cfg: ExperimentConfig) -> Path:
    ep, _ = obtain_eigenpairs(cfg.params(), cfg.cache_dir)
    prof = entropy_vs_subsystem(ep, cfg.level, cfg.m_range, locate_m=cfg.m, n=cfg.n)
    rows = [(int(m), s) for m, s in zip(prof.m, prof.entropy)]
    out = Path(cfg.out_dir) / f"{_stem(cfg, 'entropy-profile')}-level{prof.level}.csv"
    extra = [("schema", "entropy-profile"), ("level", prof.level),
             ("energy", _cell(ep.energies[prof.level])), ("slope", _cell(prof.slope)),
             ("intercept", _cell(prof.intercept)), ("one_minus_r2", _cell(prof.residual))]
    return _write_csv(out, cfg, ["m", "S"], rows, extra)


def run_eth_check(cfg: ExperimentConfig) -> Path:
    ep, _ = obtain_eigenpairs(cfg.params(), cfg.cache_dir)
    observable = cfg.observable
    if observable not in ("n0n1", "nn"):
        observable = tuple(int(x) for x in observable.replace(":", ",").split(","))
    chk = eth_observable_check(ep, observable, cfg.n)
    rows = [(i, ep.energies[i], chk.eigenstate[i], chk.microcanonical[i], chk.density0[i])
            for i in range(ep.dim)]
    columns = ["level_index", "energy", "O_eigenstate", f"O_micro_{cfg.n}", "n0"]
    out = Path(cfg.out_dir) / f"{_stem(cfg, 'eth-check')}-n{cfg.n}.csv"
    return _write_csv(out, cfg, columns, rows, [("schema", "eth-check"), ("observable", cfg.observable)])


def _fluctuation_job(args):
    p, m, n, cache_dir = args
    ep, _ = obtain_eigenpairs(p, cache_dir)
    if ep.dim < n:
        return p, None
    S = eigenstate_entropies(ep, m)
    sigma, dos, center = fluctuation_from_entropies(ep.energies, S, n)
    return p, (sigma, dos, center, float(ep.energies[center]))


def run_fluctuations(cfg: ExperimentConfig, workers: int = 1) -> Path:
    """sigma(S) versus DOS over sizes, statistics and coupling sets.

    Sizes whose sector is smaller than the window are logged and skipped.
    """
    sizes = cfg.N_list or (cfg.N,)
    stats = cfg.sweep_statistics or (cfg.statistics,)
    couplings = cfg.sweep_couplings or ((cfg.tp, cfg.Vp),)
    try:
        jobs = [(cfg.params(N=N, statistics=s, tp=tp, Vp=vp), cfg.m, cfg.n, cfg.cache_dir)
                for s in stats for tp, vp in couplings for N in sizes]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_fluctuation_job, jobs))
    else:
        results = [_fluctuation_job(job) for job in jobs]
    columns = ["statistics", "integrable_flag", "N", "Np", "m", "n", "sigma_S", "dos",
               "center_index", "center_energy"]
    rows, skipped = [], []
    for p, res in results:
        if res is None:
            log.warning("skipping %s N=%d: sector smaller than window n=%d", p.statistics, p.N, cfg.n)
            skipped.append(f"{p.statistics}:N{p.N}:tp{p.tp:g}")
            continue
        sigma, dos, center, energy = res
        rows.append((p.statistics, int(p.integrable), p.N, p.Np, cfg.m, cfg.n, sigma, dos,
                     center, energy))
    extra = [("schema", "fluctuations"), ("std_convention", "sample (n-1)")]
    if skipped:
        extra.append(("skipped", " ".join(skipped)))
    out = Path(cfg.out_dir) / f"fluctuations-Np{cfg.Np}-m{cfg.m}-n{cfg.n}.csv"
    return _write_csv(out, cfg, columns, rows, extra)


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Column names and rows (as strings) of a CSV written by this module."""
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]

