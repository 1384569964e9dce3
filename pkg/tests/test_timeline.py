import re

import pytest
from hypothesis import given, strategies as st

from src.cli.timeline import TimelinePlotSpec, render_states_svg, render_timeline_svg, staircase, transfers
from src.engine.events import CENTRAL
from src.engine.simulator import run_simulation
from src.environment.random_walk import sample_path
from src.experiments.presets import preset
from src.model.config import ArchitectureKind
from src.model.errors import EmptyTraceError
from src.model.streams import KeyedStreams


def _trace(name="fig_event", arch=ArchitectureKind.OUT_EPS, replication=0):
    cfg, cmap = preset(name)
    streams = KeyedStreams(cfg.seed, replication)
    trace, _ = run_simulation(cfg, cmap, arch, sample_path(cfg, streams), streams)
    return cfg, trace


def test_single_transfer_ramp():
    assert staircase([(10.0, 1.5, 1)], 20.0) == [(0.0, 0.0), (10.0, 0.0), (11.5, 1.0), (20.0, 1.0)]


def test_empty_series_is_flat():
    assert staircase([], 5.0) == [(0.0, 0.0), (5.0, 0.0)]


@given(
    st.lists(
        st.tuples(
            st.floats(min_value=0.0, max_value=100.0),
            st.floats(min_value=0.0, max_value=10.0),
            st.integers(min_value=1, max_value=5),
        ),
        max_size=20,
    )
)
def test_staircase_is_nondecreasing(items):
    points = staircase(items, 120.0)
    counts = [c for _, c in points]
    assert all(a <= b + 1e-9 for a, b in zip(counts, counts[1:]))
    assert counts[-1] == pytest.approx(sum(m for _, _, m in items))


def test_transfers_per_actor():
    cfg, trace = _trace()
    uplinks = transfers(trace, cfg, 1) + transfers(trace, cfg, 2)
    assert sum(m for _, _, m in uplinks) == trace.ledger.uplink_components
    for start, width, m in transfers(trace, cfg, CENTRAL):
        assert width == pytest.approx(m * cfg.dt_down)


def test_svg_is_deterministic_and_marks_cancellations():
    cfg, trace = _trace()
    first = render_timeline_svg(TimelinePlotSpec(trace=trace, cfg=cfg))
    second = render_timeline_svg(TimelinePlotSpec(trace=trace, cfg=cfg))
    assert first == second
    assert first.count("<polyline") == 3
    assert len(re.findall(r'class="cancel"', first)) == len(trace.cancellations)


def test_svg_written_to_output(tmp_path):
    cfg, trace = _trace(arch=ArchitectureKind.IN_EPS)
    target = tmp_path / "nested" / "timeline.svg"
    document = render_timeline_svg(TimelinePlotSpec(trace=trace, cfg=cfg, output=target))
    assert target.read_text() == document


def test_states_plot_has_two_lines_per_index():
    _, trace = _trace("fig_time")
    document = render_states_svg(trace, [7, 10, 12])
    assert document.count('class="state"') == 3
    assert document.count('class="estimate"') == 3


def test_empty_trace_is_rejected():
    cfg, trace = _trace()
    trace.records.clear()
    with pytest.raises(EmptyTraceError, match="empty trace"):
        render_timeline_svg(TimelinePlotSpec(trace=trace, cfg=cfg))
