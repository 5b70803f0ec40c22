"""Command-line driver.

Exit codes: 0 success, 2 configuration error, 3 eigensolver failure,
4 unreadable eigenpair cache.
"""

from __future__ import annotations

import functools
import logging
import sys

import click

from . import experiment
from .experiment import ConfigError
from .spectrum import CacheError, DiagonalizationError

EXIT_CONFIG, EXIT_SOLVER, EXIT_CACHE = 2, 3, 4


def _common(func):
    @click.option("--config", "config_path", type=click.Path(dir_okay=False),
                  help="key = value config file, or a CSV written by a previous run.")
    @click.option("--preset", type=click.Choice(sorted(experiment.PRESETS)))
    @click.option("--out", "out_dir", type=click.Path(file_okay=False), help="Output directory.")
    @click.option("--cache", "cache_dir", type=click.Path(file_okay=False),
                  help="Eigenpair cache directory.")
    @click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
    @click.option("--seed", type=int, help="Overrides the config seed.")
    @functools.wraps(func)
    def wrapper(config_path, preset, out_dir, cache_dir, workers, seed, **kwargs):
        try:
            cfg = experiment.load_config(config_path, preset, out_dir=out_dir,
                                         cache_dir=cache_dir, seed=seed)
            result = func(cfg, workers=workers, **kwargs)
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except DiagonalizationError as exc:
            click.echo(f"solver error: {exc}", err=True)
            sys.exit(EXIT_SOLVER)
        except CacheError as exc:
            click.echo(f"cache error: {exc}", err=True)
            sys.exit(EXIT_CACHE)
        if result is not None:
            click.echo(result)
    return wrapper


@click.group()
@click.option("-v", "--verbose", is_flag=True)
def main(verbose):
    """Entanglement entropy of energy eigenstates in 1D lattice models."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@_common
def spectrum(cfg, workers):
    """Diagonalize (or load from cache) and print a one-line summary."""
    return experiment.run_spectrum(cfg).line()


@main.command("entropy-curve")
@_common
def entropy_curve(cfg, workers):
    """Entropy versus energy in every requested mode."""
    return experiment.run_entropy_curve(cfg)


@main.command("entropy-profile")
@_common
def entropy_profile(cfg, workers):
    """S(m) for one eigenstate."""
    return experiment.run_entropy_profile(cfg)


@main.command()
@_common
def fluctuations(cfg, workers):
    """Entropy fluctuations against density of states across sizes."""
    return experiment.run_fluctuations(cfg, workers=workers)


@main.command("eth-check")
@_common
def eth_check(cfg, workers):
    """Eigenstate versus window-averaged density correlator."""
    return experiment.run_eth_check(cfg)


if __name__ == "__main__":
    main()
