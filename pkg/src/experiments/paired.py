"""Common-random-number paired runs and replication statistics."""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import norm
from tqdm import tqdm

from ..engine.simulator import SimulationTrace, run_simulation
from ..environment.random_walk import sample_path
from ..environment.setups import ConditionedScenario
from ..fusion.metrics import MetricsReport
from ..model.config import ArchitectureKind, ComponentMap, ScenarioConfig
from ..model.errors import CouplingError
from ..model.streams import KeyedStreams

logger = logging.getLogger(__name__)

CI_LEVEL = 0.99

IN, OUT = ArchitectureKind.IN_EPS, ArchitectureKind.OUT_EPS


@dataclass
class PairedResult:
    replication: int
    reports: Dict[ArchitectureKind, MetricsReport]
    differences: Dict[str, float]
    checksums: Dict[ArchitectureKind, str]
    traces: Dict[ArchitectureKind, SimulationTrace] = field(default_factory=dict, repr=False)


def paired_run(
    cfg: ScenarioConfig,
    cmap: ComponentMap,
    archs: Sequence[ArchitectureKind],
    replication: int,
    scenario: Optional[ConditionedScenario] = None,
    root_seed: Optional[int] = None,
    keep_traces: bool = False,
) -> PairedResult:
    """Simulate every architecture on one path with identical keyed primitives."""
    root_seed = cfg.seed if root_seed is None else root_seed
    if scenario is None:
        streams = KeyedStreams(root_seed, replication)
        source, run_cfg = sample_path(cfg, streams), cfg
    else:
        streams, source, run_cfg = scenario.streams, scenario, scenario.cfg

    reports, checksums, traces = {}, {}, {}
    for arch in archs:
        trace, report = run_simulation(run_cfg, cmap, arch, source, streams)
        reports[arch], checksums[arch], traces[arch] = report, trace.primitive_digest, trace
    if len(set(checksums.values())) > 1:
        raise CouplingError(f"replication {replication}: primitive checksums differ across architectures")

    differences: Dict[str, float] = {}
    if IN in reports and OUT in reports:
        r_in, r_out = reports[IN], reports[OUT]
        differences["power_diff"] = r_in.power_total - r_out.power_total
        differences["mse_diff"] = r_in.mse_total - r_out.mse_total
        for i in sorted(r_in.per_index_mse):
            differences[f"mse_diff_idx_{i}"] = r_in.per_index_mse[i] - r_out.per_index_mse[i]
    return PairedResult(
        replication=replication,
        reports=reports,
        differences=differences,
        checksums=checksums,
        traces=traces if keep_traces else {},
    )


def map_replications(fn: Callable[[int], object], n: int, threads: int = 1, progress: bool = False, desc: str = "Replications") -> List:
    """Apply ``fn`` to replication ids 0..n-1, in order, optionally across processes."""
    ids = range(n)
    if threads <= 1:
        return [fn(r) for r in tqdm(ids, desc=desc, disable=not progress)]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(tqdm(pool.map(fn, ids, chunksize=max(1, n // (threads * 8))), total=n, desc=desc, disable=not progress))


def summarize_samples(samples: pd.DataFrame) -> pd.DataFrame:
    """Mean, standard error and 99% CI of every column."""
    n = len(samples)
    z = float(norm.ppf(0.5 + CI_LEVEL / 2.0))
    rows = []
    for column in samples.columns:
        values = samples[column].to_numpy(dtype=float)
        mean = float(np.mean(values))
        se = float(np.std(values, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
        rows.append(
            {"statistic": column, "mean": mean, "se": se, "ci_low": mean - z * se, "ci_high": mean + z * se, "n": n}
        )
    return pd.DataFrame(rows, columns=["statistic", "mean", "se", "ci_low", "ci_high", "n"])


@dataclass
class ReplicationSummary:
    samples: pd.DataFrame
    estimates: pd.DataFrame
    results: List[PairedResult]

    def estimate(self, statistic: str) -> Tuple[float, float]:
        row = self.estimates.set_index("statistic").loc[statistic]
        return float(row["mean"]), float(row["se"])

    def metrics_frame(self) -> pd.DataFrame:
        rows = []
        for result in self.results:
            for arch, report in result.reports.items():
                rows.append({"replication": result.replication, "arch": arch.value, **report.to_row()})
        return pd.DataFrame(rows)

    def events_frame(self) -> pd.DataFrame:
        frames = [trace.to_frame() for result in self.results for trace in result.traces.values()]
        return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()


def _sample_row(result: PairedResult) -> Dict[str, float]:
    row = dict(result.differences)
    for arch, report in result.reports.items():
        row[f"{arch.value}_mse_total"] = report.mse_total
        row[f"{arch.value}_power_total"] = report.power_total
    return row


def replicate(
    cfg: ScenarioConfig,
    cmap: ComponentMap,
    archs: Sequence[ArchitectureKind],
    n: int,
    threads: int = 1,
    progress: bool = False,
    keep_traces: bool = False,
) -> ReplicationSummary:
    """N independent paired replications; estimates do not depend on execution order."""
    if n < 2:
        raise ValueError("replicate requires N >= 2")
    logger.info("Running %d paired replications of %s", n, [a.value for a in archs])
    return run_replications(cfg, cmap, archs, n, threads, progress, keep_traces)


def run_replications(
    cfg: ScenarioConfig,
    cmap: ComponentMap,
    archs: Sequence[ArchitectureKind],
    n: int,
    threads: int = 1,
    progress: bool = False,
    keep_traces: bool = False,
) -> ReplicationSummary:
    worker = partial(paired_run, cfg, cmap, list(archs), keep_traces=keep_traces)
    results = map_replications(worker, n, threads, progress)
    samples = pd.DataFrame([_sample_row(r) for r in results])
    return ReplicationSummary(samples=samples, estimates=summarize_samples(samples), results=results)


def cumulative_uplink(trace: SimulationTrace) -> Tuple[np.ndarray, np.ndarray]:
    sends = trace.of_kind("uplink_send")
    times = np.array([r.time for r in sends])
    counts = np.cumsum([len(r.components) for r in sends]) if sends else np.array([], dtype=int)
    return times, counts


def uplink_dominates(lower: SimulationTrace, upper: SimulationTrace) -> bool:
    """True if ``lower`` has sent no more uplink components than ``upper`` at every event time."""
    lt, lc = cumulative_uplink(lower)
    ut, uc = cumulative_uplink(upper)
    grid = np.union1d(lt, ut)
    if grid.size == 0:
        return True

    def at(times, counts):
        idx = np.searchsorted(times, grid, side="right") - 1
        return np.where(idx >= 0, counts[np.clip(idx, 0, None)] if counts.size else 0, 0)

    return bool(np.all(at(lt, lc) <= at(ut, uc)))


def unshared_uplinks(trace: SimulationTrace, cmap: ComponentMap) -> List[Tuple[float, int, int, float]]:
    """(time, sensor, component, value) of every transmitted unshared component."""
    out = []
    for record in trace.of_kind("uplink_send"):
        for k, value in zip(record.components, record.values):
            if k in cmap.all_unshared:
                out.append((record.time, record.actor, k, value))
    return out
