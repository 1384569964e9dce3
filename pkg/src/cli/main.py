"""Command-line surface: scenario emission, simulation, verification, timelines and sweeps."""

import json
import logging
import sys
from functools import wraps
from pathlib import Path
from typing import List

import click
import pandas as pd

from ..engine.simulator import run_simulation
from ..environment.random_walk import sample_path
from ..experiments.paired import run_replications
from ..experiments.presets import FIG_TIME_INDICES, PRESETS, preset
from ..experiments.sweep import sweep as run_sweep
from ..experiments.verify import THEOREMS, verify_theorem
from ..model.config import ArchitectureKind, load_scenario, scenario_to_dict, validate_config, with_overrides
from ..model.errors import ConditioningInfeasibleError, ConfigValidationError, OutformationError
from ..model.streams import KeyedStreams
from ..utils.io import refuse_overwrite, save_frame_csv, save_json
from ..utils.paths import output_dir
from ..utils.settings import get_thread_count
from .timeline import TimelinePlotSpec, render_states_svg, render_timeline_svg

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_CONDITIONING, EXIT_OVERWRITE = 0, 2, 3, 4, 5


def _fail(message: str, code: int) -> None:
    click.echo(message, err=True)
    sys.exit(code)


def exit_codes(fn):
    """Map toolkit exceptions onto the CLI's exit-code contract."""

    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except json.JSONDecodeError as e:
            _fail(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}", EXIT_CONFIG)
        except ConfigValidationError as e:
            _fail("config validation failed:\n" + "\n".join(f"  - {v}" for v in e.violations), EXIT_CONFIG)
        except ConditioningInfeasibleError as e:
            _fail(f"error: {e}", EXIT_CONDITIONING)
        except FileExistsError as e:
            _fail(f"error: {e}", EXIT_OVERWRITE)
        except (OutformationError, OSError, ValueError) as e:
            _fail(f"error: {e}", EXIT_RUNTIME)

    return wrapper


def _parse_archs(value: str) -> List[ArchitectureKind]:
    try:
        archs = ArchitectureKind.parse_list(value)
    except ValueError as e:
        raise click.BadParameter(str(e)) from None
    if not archs:
        raise click.BadParameter("at least one architecture is required")
    return list(dict.fromkeys(archs))


def _parse_indices(value: str) -> List[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}") from None


def _load(config: Path, seed=None):
    cfg, cmap = load_scenario(config)
    if seed is not None:
        cfg = validate_config(with_overrides(cfg, seed=seed), cmap)
    return cfg, cmap


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Log progress at INFO level.")
def cli(verbose: bool):
    """Simulate and verify IN/OUT sensor-fusion architectures."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


@cli.command()
@click.option("--preset", "name", required=True, type=click.Choice(sorted(PRESETS)))
@click.option("--emit", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--force", is_flag=True, help="Overwrite an existing file.")
@exit_codes
def scenario(name: str, emit: Path, force: bool):
    """Write a preset's scenario document."""
    refuse_overwrite(emit, force)
    cfg, cmap = preset(name)
    if not save_json(scenario_to_dict(cfg, cmap), emit):
        _fail(f"error: could not write {emit}", EXIT_RUNTIME)
    click.echo(f"Wrote preset {name} to {emit}")


@cli.command()
@click.option("--config", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--arch", "archs", default="in0,in_eps,out_eps", show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Override the scenario's root seed.")
@click.option("--reps", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None, help="Output directory.")
@click.option("--progress", is_flag=True)
@exit_codes
def simulate(config: Path, archs: str, seed, reps: int, out: Path, progress: bool):
    """Paired replications of the chosen architectures."""
    out = out or output_dir("simulate")
    cfg, cmap = _load(config, seed)
    arch_list = _parse_archs(archs)
    summary = run_replications(cfg, cmap, arch_list, reps, get_thread_count(), progress, keep_traces=True)
    ok = save_frame_csv(summary.events_frame(), out / "events.csv")
    ok = save_frame_csv(summary.metrics_frame(), out / "metrics.csv") and ok
    if not ok:
        _fail(f"error: could not write artifacts to {out}", EXIT_RUNTIME)
    click.echo(f"Simulated {reps} replication(s) of {', '.join(a.value for a in arch_list)} into {out}")


@cli.command()
@click.option("--theorem", required=True, type=click.Choice(THEOREMS))
@click.option("--config", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--reps", type=click.IntRange(min=2), default=1000, show_default=True)
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None, help="Output directory.")
@click.option("--progress", is_flag=True)
@exit_codes
def verify(theorem: str, config: Path, reps: int, out: Path, progress: bool):
    """Compare a theorem's closed forms with paired Monte Carlo."""
    out = out or output_dir("verify")
    cfg, cmap = _load(config)
    report = verify_theorem(theorem, cfg, cmap, reps, threads=get_thread_count(), progress=progress)
    theory = report.theory_frame()
    if not (save_json(report.to_dict(), out / f"verify_{theorem}.json") and save_frame_csv(theory, out / "theory.csv")):
        _fail(f"error: could not write artifacts to {out}", EXIT_RUNTIME)
    click.echo(f"{theorem}: mc={report.mc_estimate:.6g} se={report.mc_stderr:.3g} n={report.n}")
    with pd.option_context("display.float_format", "{:.6g}".format):
        click.echo(theory[["formula_id", "variant", "closed_form_value", "verdict"]].to_string(index=False))
    sys.exit(EXIT_OK if report.any_passed else 1)


@cli.command()
@click.option("--config", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--arch", "archs", default="in_eps,out_eps", show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=None)
@click.option("--replication", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--indices", default=None, help="Full indices for the state plot, e.g. 7,10,12.")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None, help="Output directory.")
@exit_codes
def timeline(config: Path, archs: str, seed, replication: int, indices, out: Path):
    """SVG timelines of cumulative transmissions for one path."""
    out = out or output_dir("timeline")
    cfg, cmap = _load(config, seed)
    if indices is None:
        chosen = [i for i in FIG_TIME_INDICES if i <= cfg.n]
    else:
        chosen = _parse_indices(indices)
        bad = [i for i in chosen if not 1 <= i <= cfg.n]
        if bad:
            raise click.BadParameter(f"full indices out of range 1..{cfg.n}: {bad}")
    streams = KeyedStreams(cfg.seed, replication)
    path = sample_path(cfg, streams)
    for arch in _parse_archs(archs):
        trace, _ = run_simulation(cfg, cmap, arch, path, streams)
        render_timeline_svg(TimelinePlotSpec(trace=trace, cfg=cfg, output=out / f"timeline_{arch.value}.svg"))
        if chosen:
            render_states_svg(trace, chosen, output=out / f"states_{arch.value}.svg")
    path.to_csv(out / "path.csv")
    click.echo(f"Wrote timelines to {out}")


@cli.command()
@click.option("--config", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--arch", "archs", default="in0,in_eps,out_eps", show_default=True)
@click.option("--reps", type=click.IntRange(min=2), default=100, show_default=True)
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None, help="Output directory.")
@click.option("--progress", is_flag=True)
@exit_codes
def sweep(config: Path, archs: str, reps: int, out: Path, progress: bool):
    """Mean MSE and power per architecture over the (epsilon, sigma) grid."""
    out = out or output_dir("sweep")
    cfg, cmap = _load(config)
    table = run_sweep(cfg, cmap, _parse_archs(archs), reps, threads=get_thread_count(), progress=progress)
    if not save_frame_csv(table, out / "sweep.csv"):
        _fail(f"error: could not write {out / 'sweep.csv'}", EXIT_RUNTIME)
    click.echo(f"Wrote {len(table)} rows to {out / 'sweep.csv'}")


if __name__ == "__main__":
    cli()
