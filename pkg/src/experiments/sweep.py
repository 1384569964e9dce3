"""Parameter sweep over (epsilon, sigma)."""

import logging
from typing import Iterable, Sequence, Tuple

import pandas as pd
from tqdm import tqdm

from ..model.config import ArchitectureKind, ComponentMap, ScenarioConfig, validate_config, with_overrides
from .paired import replicate
from .presets import sweep_grid

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "epsilon",
    "sigma",
    "arch",
    "mse_mean",
    "mse_se",
    "power_mean",
    "power_se",
    "uplink_mean",
    "parameter_source",
]


def sweep(
    cfg: ScenarioConfig,
    cmap: ComponentMap,
    archs: Sequence[ArchitectureKind],
    n: int,
    grid: Iterable[Tuple[float, float]] = None,
    threads: int = 1,
    progress: bool = False,
) -> pd.DataFrame:
    """Replicate every architecture at each (epsilon, sigma) grid point."""
    grid = list(sweep_grid() if grid is None else grid)
    rows = []
    for epsilon, sigma in tqdm(grid, desc="Sweep", disable=not progress):
        point_cfg = validate_config(with_overrides(cfg, epsilon=epsilon, sigma=sigma), cmap)
        summary = replicate(point_cfg, cmap, archs, n, threads=threads)
        metrics = summary.metrics_frame()
        for arch in archs:
            mse_mean, mse_se = summary.estimate(f"{arch.value}_mse_total")
            power_mean, power_se = summary.estimate(f"{arch.value}_power_total")
            uplink = metrics.loc[metrics["arch"] == arch.value, "uplink_components"]
            rows.append(
                {
                    "epsilon": epsilon,
                    "sigma": sigma,
                    "arch": arch.value,
                    "mse_mean": mse_mean,
                    "mse_se": mse_se,
                    "power_mean": power_mean,
                    "power_se": power_se,
                    "uplink_mean": float(uplink.mean()),
                    "parameter_source": "toolkit",
                }
            )
        logger.debug("Sweep point eps=%s sigma=%s done", epsilon, sigma)
    logger.info("Sweep finished: %d grid points x %d architectures", len(grid), len(archs))
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
