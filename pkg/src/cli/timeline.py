"""SVG timelines: cumulative transmitted components per actor, and state/estimate plots."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from jinja2 import Environment, FileSystemLoader

from ..engine.events import CENTRAL
from ..engine.simulator import SimulationTrace
from ..model.config import ScenarioConfig
from ..model.errors import EmptyTraceError
from ..utils.io import save_text

TEMPLATES_DIR = Path(__file__).parent / "templates"

WIDTH, HEIGHT = 720, 360
MARGIN = {"left": 60, "right": 20, "top": 30, "bottom": 45}

ACTOR_STYLES = {
    1: ("Sensor 1 uplink", "#1f4fd1"),
    2: ("Sensor 2 uplink", "#2a9d3a"),
    CENTRAL: ("Central downlink", "#d1261f"),
}
STATE_COLORS = ("#444444", "#1f4fd1", "#2a9d3a", "#d1261f", "#8a3ab9", "#d18a1f")


@dataclass
class TimelinePlotSpec:
    trace: SimulationTrace
    cfg: ScenarioConfig
    actors: Tuple[int, ...] = (1, 2, CENTRAL)
    x_range: Optional[Tuple[float, float]] = None
    y_range: Optional[Tuple[float, float]] = None
    output: Optional[Path] = None
    title: str = ""


@dataclass
class Series:
    label: str
    color: str
    points: List[Tuple[float, float]]
    markers: List[Tuple[float, float]] = field(default_factory=list)


def _fmt(value: float) -> str:
    return "%.3f" % value


def _environment() -> Environment:
    env = Environment(loader=FileSystemLoader(str(TEMPLATES_DIR)), autoescape=True, keep_trailing_newline=True)
    env.filters["fmt"] = _fmt
    return env


def transfers(trace: SimulationTrace, cfg: ScenarioConfig, actor: int) -> List[Tuple[float, float, int]]:
    """(start, duration, components) of every transfer made by ``actor``."""
    if actor == CENTRAL:
        return [(r.time, len(r.components) * cfg.dt_down, len(r.components)) for r in trace.of_kind("bcast_send")]
    return [
        (r.time, len(r.components) * cfg.dt_up, len(r.components))
        for r in trace.of_kind("uplink_send")
        if r.actor == actor
    ]


def staircase(items: Sequence[Tuple[float, float, int]], t_end: float) -> List[Tuple[float, float]]:
    """Cumulative count as a sum of ramps, exact at every ramp start and end."""
    if not items:
        return [(0.0, 0.0), (t_end, 0.0)]
    starts = np.array([s for s, _, _ in items], dtype=float)
    widths = np.array([w for _, w, _ in items], dtype=float)
    sizes = np.array([m for _, _, m in items], dtype=float)
    grid = np.unique(np.concatenate(([0.0, t_end], starts, starts + widths)))
    safe = np.where(widths > 0, widths, 1.0)
    progress = np.clip((grid[:, None] - starts[None, :]) / safe[None, :], 0.0, 1.0)
    progress = np.where(widths[None, :] > 0, progress, (grid[:, None] >= starts[None, :]).astype(float))
    counts = progress @ sizes
    return [(float(t), float(c)) for t, c in zip(grid, counts)]


def _cancel_markers(trace: SimulationTrace, points: List[Tuple[float, float]], actor: int) -> List[Tuple[float, float]]:
    times = np.array([p[0] for p in points])
    counts = np.array([p[1] for p in points])
    out = []
    for record in trace.cancellations:
        if record.actor == actor:
            out.append((record.time, float(np.interp(record.time, times, counts))))
    return out


class _Axes:
    def __init__(self, x_range: Tuple[float, float], y_range: Tuple[float, float]):
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        self.plot_w = WIDTH - MARGIN["left"] - MARGIN["right"]
        self.plot_h = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(self, x: float) -> float:
        span = (self.x1 - self.x0) or 1.0
        return MARGIN["left"] + (x - self.x0) / span * self.plot_w

    def sy(self, y: float) -> float:
        span = (self.y1 - self.y0) or 1.0
        return MARGIN["top"] + self.plot_h - (y - self.y0) / span * self.plot_h

    def ticks(self, lo: float, hi: float, count: int = 5) -> List[float]:
        return [float(v) for v in np.linspace(lo, hi, count)]

    def context(self) -> Dict:
        return {
            "left": MARGIN["left"],
            "top": MARGIN["top"],
            "right": MARGIN["left"] + self.plot_w,
            "bottom": MARGIN["top"] + self.plot_h,
            "x_ticks": [(self.sx(v), v) for v in self.ticks(self.x0, self.x1)],
            "y_ticks": [(self.sy(v), v) for v in self.ticks(self.y0, self.y1)],
        }


def _scaled(axes: _Axes, series: List[Series]) -> List[Dict]:
    return [
        {
            "label": s.label,
            "color": s.color,
            "points": [(axes.sx(t), axes.sy(c)) for t, c in s.points],
            "markers": [(axes.sx(t), axes.sy(c)) for t, c in s.markers],
        }
        for s in series
    ]


def render_timeline_svg(spec: TimelinePlotSpec) -> str:
    """One cumulative-components polyline per actor, with cancellation markers."""
    trace = spec.trace
    if not trace.records:
        raise EmptyTraceError("empty trace")
    t_end = trace.horizon
    series = []
    for actor in spec.actors:
        label, color = ACTOR_STYLES[actor]
        points = staircase(transfers(trace, spec.cfg, actor), t_end)
        series.append(Series(label, color, points, _cancel_markers(trace, points, actor) if actor != CENTRAL else []))

    x_range = spec.x_range or (0.0, t_end)
    y_max = max(c for s in series for _, c in s.points)
    y_range = spec.y_range or (0.0, max(1.0, y_max))
    axes = _Axes(x_range, y_range)
    document = _environment().get_template("timeline.svg.j2").render(
        width=WIDTH,
        height=HEIGHT,
        title=spec.title or f"{trace.arch.value} replication {trace.replication}",
        x_label="time",
        y_label="cumulative components",
        axes=axes.context(),
        series=_scaled(axes, series),
    )
    if spec.output is not None and not save_text(document, spec.output):
        raise OSError(f"could not write {spec.output}")
    return document


def render_states_svg(trace: SimulationTrace, indices: Sequence[int], output: Optional[Path] = None) -> str:
    """Step plots of x_i(t) (dashed) and the central estimate (solid) for each chosen full index."""
    if not trace.records:
        raise EmptyTraceError("empty trace")
    t_end = trace.horizon
    series = []
    for n, i in enumerate(indices):
        color = STATE_COLORS[n % len(STATE_COLORS)]
        for kind, (times, values) in (("x", trace.path.breakpoints(i)), ("xhat", trace.estimates.breakpoints(i))):
            points = []
            for t, v, t_next in zip(times, values, list(times[1:]) + [t_end]):
                t_next = min(float(t_next), t_end)
                points.extend([(float(t), float(v)), (t_next, float(v))])
            series.append({"label": f"{kind}_{i}", "color": color, "dashed": kind == "x", "raw": points})

    values = [v for s in series for _, v in s["raw"]]
    lo, hi = min(values), max(values)
    if lo == hi:
        lo, hi = lo - 1.0, hi + 1.0
    axes = _Axes((0.0, t_end), (lo, hi))
    for s in series:
        s["points"] = [(axes.sx(t), axes.sy(v)) for t, v in s.pop("raw")]
    document = _environment().get_template("states.svg.j2").render(
        width=WIDTH,
        height=HEIGHT,
        title=f"{trace.arch.value} replication {trace.replication}: states and estimates",
        axes=axes.context(),
        series=series,
    )
    if output is not None and not save_text(document, output):
        raise OSError(f"could not write {output}")
    return document
