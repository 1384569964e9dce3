"""Monte Carlo verification of the closed forms against paired simulation."""

import logging
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..environment.setups import build_setup_one, build_setup_two, find_setup_two_pair
from ..fusion.metrics import integrate_index
from ..model.config import ComponentMap, ScenarioConfig, config_digest
from ..model.streams import KeyedStreams
from ..theory.closed_forms import (
    FormulaVariant,
    mse_shared_gen_prob,
    mse_shared_prob,
    power_shared_expected_diff,
    unshared_power_expected,
)
from ..theory.estimation import PTableAccumulator, default_interval
from .paired import IN, OUT, map_replications, paired_run, unshared_uplinks

logger = logging.getLogger(__name__)

THEOREMS = ("power_unshared", "mse_unshared", "power_shared", "mse_shared", "mse_shared_gen")
SE_BAND = 3.0
EXACT_TOLERANCE = 1e-12
RELATIVE_TOLERANCE = 0.02
THEORY_COLUMNS = ["formula_id", "variant", "closed_form_value", "mc_estimate", "mc_stderr", "n_samples", "verdict"]


@dataclass
class ClosedFormCheck:
    variant: str
    accounting: str
    value: float
    mc_estimate: float
    mc_stderr: float
    passed: bool

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"


@dataclass
class VerificationReport:
    theorem: str
    cfg_digest: str
    mc_estimate: float
    mc_stderr: float
    n: int
    checks: List[ClosedFormCheck] = field(default_factory=list)
    extras: Dict[str, Any] = field(default_factory=dict)

    @property
    def any_passed(self) -> bool:
        return any(check.passed for check in self.checks)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for check, raw in zip(self.checks, data["checks"]):
            raw["verdict"] = check.verdict
        return data

    def theory_frame(self) -> pd.DataFrame:
        rows = [
            {
                "formula_id": f"{self.theorem}[{check.accounting}]",
                "variant": check.variant,
                "closed_form_value": check.value,
                "mc_estimate": check.mc_estimate,
                "mc_stderr": check.mc_stderr,
                "n_samples": self.n,
                "verdict": check.verdict,
            }
            for check in self.checks
        ]
        return pd.DataFrame(rows, columns=THEORY_COLUMNS)


def within_band(mc: float, se: float, value: float, relative: float = 0.0) -> bool:
    """|mc - value| inside 3 SE (or the relative tolerance, whichever is wider)."""
    band = max(SE_BAND * se, relative * abs(value), EXACT_TOLERANCE)
    return abs(mc - value) <= band


def _mean_se(values) -> Tuple[float, float]:
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return float(values.mean()) if values.size else 0.0, 0.0
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size))


def _free_running_pair(cfg: ScenarioConfig, cmap: ComponentMap, replication: int):
    return paired_run(cfg, cmap, [IN, OUT], replication, keep_traces=True)


# Per-replication statistics. Each returns a small dict so replications can run in worker processes.


def _unshared_stats(cfg: ScenarioConfig, cmap: ComponentMap, interval: int, replication: int) -> Dict[str, Any]:
    result = _free_running_pair(cfg, cmap, replication)
    t_in, t_out = result.traces[IN], result.traces[OUT]
    start, end = interval * cfg.delta_t, (interval + 1) * cfg.delta_t
    received = 0
    for record in t_in.of_kind("uplink_arrive"):
        if start <= record.time < end:
            received += sum(1 for k in record.components if k in cmap.all_unshared)
    unshared_indices = sorted(cmap.full_index[k] for k in cmap.all_unshared)
    same_sends = unshared_uplinks(t_in, cmap) == unshared_uplinks(t_out, cmap)
    same_estimates = all(
        t_in.estimates.trajectory[i] == t_out.estimates.trajectory[i] for i in unshared_indices
    )
    window = (0.0, t_in.horizon)
    same_mse = all(
        integrate_index(t_in.path, t_in.estimates, i, window) == integrate_index(t_out.path, t_out.estimates, i, window)
        for i in unshared_indices
    )
    accumulator = PTableAccumulator(cfg, cmap, interval)
    accumulator.add(t_in)
    return {
        "received_power": cfg.p_up * received,
        "equal": bool(same_sends and same_estimates and same_mse),
        "p_hits": dict(accumulator.counts),
    }


def _setup_one_stats(cfg: ScenarioConfig, cmap: ComponentMap, replication: int) -> Dict[str, Any]:
    scenario = build_setup_one(cfg, cmap, KeyedStreams(cfg.seed, replication))
    result = paired_run(cfg, cmap, [IN, OUT], replication, scenario=scenario, keep_traces=True)
    t_in, t_out = result.traces[IN], result.traces[OUT]
    t0, tf = scenario.window
    i = scenario.metadata.full_indices["k"]
    mse_in = integrate_index(t_in.path, t_in.estimates, i, (t0, tf))
    mse_out = integrate_index(t_out.path, t_out.estimates, i, (t0, tf))
    return {
        "power_diff_conditional": t_in.ledger.power(t0, tf, "conditional") - t_out.ledger.power(t0, tf, "conditional"),
        "power_diff_always": t_in.ledger.power(t0, tf, "always") - t_out.ledger.power(t0, tf, "always"),
        "mse_improved": float(mse_out < mse_in),
        "mse_diff": mse_in - mse_out,
        "rejections": scenario.metadata.rejections,
    }


def _sample_value(trace, sensor: int, component: int, t: float) -> Optional[float]:
    for record in trace.of_kind("sample"):
        if record.actor == sensor and record.components[0] == component and round(record.time, 9) == round(t, 9):
            return record.values[0]
    return None


def _setup_two_stats(cfg: ScenarioConfig, cmap: ComponentMap, replication: int) -> Dict[str, Any]:
    scenario = build_setup_two(cfg, cmap, KeyedStreams(cfg.seed, replication))
    result = paired_run(cfg, cmap, [IN, OUT], replication, scenario=scenario, keep_traces=True)
    t_in, t_out = result.traces[IN], result.traces[OUT]
    meta = scenario.metadata
    a1, a2 = meta.intervals["a1"], meta.intervals["a2"]
    t1, t2 = a1 * cfg.T_1, a2 * cfg.T_2
    window = (scenario.window[0], scenario.horizon)
    i_own = meta.full_indices["k_own"]
    k_shared = meta.components["k_shared"]
    mse_in = integrate_index(t_in.path, t_in.estimates, i_own, window)
    mse_out = integrate_index(t_out.path, t_out.estimates, i_own, window)
    y2 = _sample_value(t_in, 2, k_shared, t2)
    y1 = _sample_value(t_in, 1, k_shared, t1)
    close = abs(y2 - y1) < cfg.epsilon
    sent = any(
        record.actor == 1 and k_shared in record.components for record in t_out.of_kind("uplink_send")
    )
    return {
        "mse_improved": float(mse_out < mse_in),
        "suppressed": float(not sent),
        "suppression_matches_closeness": float((not sent) == close),
        "rejections": meta.rejections,
    }


def _collect(fn: Callable[[int], Dict[str, Any]], n: int, threads: int, progress: bool, desc: str) -> List[Dict[str, Any]]:
    return map_replications(fn, n, threads, progress, desc=desc)


def _verify_power_unshared(cfg, cmap, n, threads, progress) -> VerificationReport:
    interval = default_interval(cfg)
    rows = _collect(partial(_unshared_stats, cfg, cmap, interval), n, threads, progress, "power_unshared")
    accumulator = PTableAccumulator(cfg, cmap, interval)
    for row in rows:
        accumulator.counts.update(row["p_hits"])
        accumulator.reps += 1
    p_table = accumulator.table()
    value = unshared_power_expected(cfg, cmap, p_table)
    mc, se = _mean_se([row["received_power"] for row in rows])
    check = ClosedFormCheck(
        FormulaVariant.PRINTED.value, "any", value, mc, se, within_band(mc, se, value, RELATIVE_TOLERANCE)
    )
    relative_error = abs(mc - value) / abs(value) if value else abs(mc)
    return VerificationReport(
        theorem="power_unshared",
        cfg_digest=config_digest(cfg, cmap),
        mc_estimate=mc,
        mc_stderr=se,
        n=n,
        checks=[check],
        extras={
            "interval": interval,
            "relative_error": relative_error,
            "equal_unshared_paths": float(np.mean([row["equal"] for row in rows])),
        },
    )


def _verify_mse_unshared(cfg, cmap, n, threads, progress) -> VerificationReport:
    rows = _collect(partial(_unshared_stats, cfg, cmap, default_interval(cfg)), n, threads, progress, "mse_unshared")
    fraction = float(np.mean([row["equal"] for row in rows]))
    check = ClosedFormCheck(FormulaVariant.PRINTED.value, "any", 1.0, fraction, 0.0, fraction == 1.0)
    return VerificationReport(
        theorem="mse_unshared",
        cfg_digest=config_digest(cfg, cmap),
        mc_estimate=fraction,
        mc_stderr=0.0,
        n=n,
        checks=[check],
        extras={"paths_unequal": int(round((1.0 - fraction) * n))},
    )


def _verify_setup_one(theorem, cfg, cmap, n, threads, progress) -> VerificationReport:
    rows = _collect(partial(_setup_one_stats, cfg, cmap), n, threads, progress, theorem)
    frame = pd.DataFrame(rows)
    checks: List[ClosedFormCheck] = []
    extras: Dict[str, Any] = {"rejections": int(frame["rejections"].sum())}
    if theorem == "power_shared":
        for mode in ("conditional", "always"):
            mc, se = _mean_se(frame[f"power_diff_{mode}"])
            extras[f"mc_{mode}"] = mc
            extras[f"se_{mode}"] = se
            extras[f"distinct_diffs_{mode}"] = sorted({round(v, 12) for v in frame[f"power_diff_{mode}"]})[:10]
            for variant in FormulaVariant:
                value = power_shared_expected_diff(cfg, variant, mode)
                checks.append(ClosedFormCheck(variant.value, mode, value, mc, se, within_band(mc, se, value)))
        mc, se = extras[f"mc_{cfg.broadcast_accounting}"], extras[f"se_{cfg.broadcast_accounting}"]
    else:
        mc, se = _mean_se(frame["mse_improved"])
        extras["max_abs_mse_diff"] = float(frame["mse_diff"].abs().max())
        for variant in FormulaVariant:
            value = mse_shared_prob(cfg, variant)
            checks.append(ClosedFormCheck(variant.value, "any", value, mc, se, within_band(mc, se, value)))
    return VerificationReport(
        theorem=theorem, cfg_digest=config_digest(cfg, cmap), mc_estimate=mc, mc_stderr=se, n=n, checks=checks, extras=extras
    )


def _verify_mse_shared_gen(cfg, cmap, n, threads, progress) -> VerificationReport:
    pair = find_setup_two_pair(cfg)
    rows = _collect(partial(_setup_two_stats, cfg, cmap), n, threads, progress, "mse_shared_gen")
    frame = pd.DataFrame(rows)
    mc, se = _mean_se(frame["mse_improved"])
    checks = [
        ClosedFormCheck(variant.value, "any", mse_shared_gen_prob(cfg, pair, variant), mc, se,
                        within_band(mc, se, mse_shared_gen_prob(cfg, pair, variant)))
        for variant in FormulaVariant
    ]
    return VerificationReport(
        theorem="mse_shared_gen",
        cfg_digest=config_digest(cfg, cmap),
        mc_estimate=mc,
        mc_stderr=se,
        n=n,
        checks=checks,
        extras={
            "a1": pair[0],
            "a2": pair[1],
            "suppression_rate": float(frame["suppressed"].mean()),
            "suppression_matches_closeness": float(frame["suppression_matches_closeness"].mean()),
            "rejections": int(frame["rejections"].sum()),
        },
    )


def verify_theorem(
    theorem: str,
    cfg: ScenarioConfig,
    cmap: ComponentMap,
    n: int,
    threads: int = 1,
    progress: bool = False,
) -> VerificationReport:
    """Paired Monte Carlo estimate of ``theorem``'s statistic against every closed-form variant."""
    if theorem not in THEOREMS:
        raise ValueError(f"unknown theorem: {theorem!r}")
    logger.info("Verifying %s with N=%d", theorem, n)
    if theorem == "power_unshared":
        report = _verify_power_unshared(cfg, cmap, n, threads, progress)
    elif theorem == "mse_unshared":
        report = _verify_mse_unshared(cfg, cmap, n, threads, progress)
    elif theorem in ("power_shared", "mse_shared"):
        report = _verify_setup_one(theorem, cfg, cmap, n, threads, progress)
    else:
        report = _verify_mse_shared_gen(cfg, cmap, n, threads, progress)
    logger.info(
        "Verification complete: %s mc=%.6g se=%.3g verdicts=%s",
        theorem,
        report.mc_estimate,
        report.mc_stderr,
        [(c.variant, c.accounting, c.verdict) for c in report.checks],
    )
    return report
