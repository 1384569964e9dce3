import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad
from scipy.special import ndtr

from src.experiments.presets import preset
from src.model.backoff import BackoffSpec
from src.model.config import ComponentMap, with_overrides
from src.model.errors import MissingPEntriesError, SetupGeometryError
from src.theory.closed_forms import (
    FormulaVariant,
    PTable,
    backoff_diff_cdf,
    mse_shared_gen_prob,
    mse_shared_prob,
    power_shared_expected_diff,
    unshared_grid,
    unshared_power_expected,
)
from src.theory.estimation import estimate_p_jk
from src.theory.gaussian import gauss_abs_diff_prob, printed_region, proof_consistent_region, strip_probability

PRINTED, PROOF = FormulaVariant.PRINTED, FormulaVariant.PROOF_CONSISTENT


@pytest.mark.parametrize("epsilon,sigma", [(1.0, 1.0), (0.5, 0.1), (2.0, 3.0), (0.25, 1.0)])
def test_abs_diff_matches_normal_cdf(epsilon, sigma):
    expected = 2.0 * (1.0 - ndtr(epsilon / (sigma * math.sqrt(2.0))))
    assert abs(gauss_abs_diff_prob(epsilon, sigma) - expected) <= 1e-12


@given(st.floats(min_value=1e-3, max_value=50.0), st.floats(min_value=1e-3, max_value=50.0))
def test_abs_diff_sides_sum_to_one(epsilon, sigma):
    total = gauss_abs_diff_prob(epsilon, sigma, "geq") + gauss_abs_diff_prob(epsilon, sigma, "lt")
    assert total == pytest.approx(1.0, abs=1e-15)


def test_abs_diff_noiseless_branch():
    assert gauss_abs_diff_prob(1.0, 0.0, "geq") == 0.0
    assert gauss_abs_diff_prob(1.0, 0.0, "lt") == 1.0
    assert gauss_abs_diff_prob(0.0, 0.0, "geq") == 1.0


def test_abs_diff_against_sampling():
    rng = np.random.default_rng(11)
    w = rng.standard_normal((1_000_000, 2))
    hits = np.abs(w[:, 0] - w[:, 1]) >= 1.0
    se = hits.std() / math.sqrt(hits.size)
    assert abs(hits.mean() - gauss_abs_diff_prob(1.0, 1.0)) <= 3 * se


@pytest.mark.parametrize("b", [1.0, 10.0])
def test_uniform_difference_cdf_is_triangular(b):
    spec = BackoffSpec.uniform(b)
    for s in np.linspace(-1.2 * b, 1.2 * b, 41):
        kinks = [p for p in (-s, b - s) if 0.0 < p < b] or None
        exact = quad(lambda x: min(max((x + s) / b, 0.0), 1.0) / b, 0.0, b, points=kinks)[0]
        assert abs(backoff_diff_cdf(spec, s) - exact) <= 1e-9


@given(st.floats(min_value=-20.0, max_value=20.0))
def test_difference_cdf_symmetry(s):
    for spec in (BackoffSpec.uniform(10.0), BackoffSpec.empirical([0.0, 2.5, 7.0])):
        if spec.kind == "empirical" and any(
            math.isclose(abs(a - b), abs(s)) for a in spec.values for b in spec.values
        ):
            continue
        assert backoff_diff_cdf(spec, s) + backoff_diff_cdf(spec, -s) == pytest.approx(1.0, abs=1e-12)


def test_difference_cdf_is_monotone():
    spec = BackoffSpec.uniform(10.0)
    values = [backoff_diff_cdf(spec, s) for s in np.linspace(-12, 12, 97)]
    assert all(a <= b for a, b in zip(values, values[1:]))


def test_zero_backoff_difference_is_a_step():
    assert backoff_diff_cdf(BackoffSpec.zero(), -0.1) == 0.0
    assert backoff_diff_cdf(BackoffSpec.zero(), 0.0) == 1.0


@pytest.mark.parametrize("region", [proof_consistent_region, printed_region])
def test_strip_quadrature_against_sampling(region):
    sigma, epsilon = 1.0, 1.0
    rng = np.random.default_rng(5)
    w1, w2 = rng.standard_normal((2, 1_000_000)) * sigma
    strip = np.abs(w1 - w2) < epsilon
    if region is proof_consistent_region:
        event = 0.25 * (w1 + w2) ** 2 - w1**2 > 0
    else:
        event = 0.5 * w1 * w2 + w2**2 - 0.75 * w1**2 > 0
    hits = strip & event
    se = hits.std() / math.sqrt(hits.size)
    assert abs(hits.mean() - strip_probability(epsilon, sigma, region)) <= 3 * se


def test_mse_shared_prob_monotone_in_epsilon(setup1):
    cfg, _ = setup1
    for variant in FormulaVariant:
        values = [mse_shared_prob(with_overrides(cfg, epsilon=e), variant) for e in (0.1, 0.5, 1.0, 2.0, 4.0)]
        assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))


def test_mse_shared_prob_noiseless_is_zero(setup1_noiseless):
    cfg, _ = setup1_noiseless
    assert mse_shared_prob(cfg, PRINTED) == 0.0
    assert mse_shared_prob(cfg, PROOF) == 0.0


def test_power_shared_closed_forms(setup1):
    cfg, _ = setup1
    wins = 1.0 - 2.0 / 10.0
    p_lt = 1.0 - gauss_abs_diff_prob(1.0, 1.0)
    assert power_shared_expected_diff(cfg, PROOF) == pytest.approx((2.0 - 1.0) * wins * p_lt)
    assert power_shared_expected_diff(cfg, PRINTED) == pytest.approx(wins * (1.0 - p_lt))
    assert power_shared_expected_diff(cfg, PROOF, "always") == pytest.approx(3.0 * wins * p_lt - 2.0)
    with pytest.raises(ValueError):
        power_shared_expected_diff(cfg, PROOF, "sometimes")


def test_noiseless_power_shared_proof_variant(setup1_noiseless):
    cfg, _ = setup1_noiseless
    assert power_shared_expected_diff(cfg, PROOF) == pytest.approx(0.8)
    assert power_shared_expected_diff(cfg, PRINTED) == 0.0


def test_mse_shared_gen_orientations():
    cfg, _ = preset("setup2")
    p_lt = 1.0 - gauss_abs_diff_prob(cfg.epsilon, cfg.sigma)
    gap = 2 * 23.0 - 41.0
    spec = cfg.backoff
    assert mse_shared_gen_prob(cfg, (2, 1), PROOF) == pytest.approx(p_lt * backoff_diff_cdf(spec, gap - 2.0))
    assert mse_shared_gen_prob(cfg, (2, 1), PRINTED) == pytest.approx(p_lt * (1 - backoff_diff_cdf(spec, gap + 2.0)))
    with pytest.raises(SetupGeometryError, match="invalid setup-2 geometry"):
        mse_shared_gen_prob(cfg, (1, 1), PROOF)


def test_unshared_grid_weights():
    cfg, cmap = preset("unshared_power")
    points = unshared_grid(cfg, cmap, 1, 1)
    # H = 5: six instants in the previous interval, four inside
    assert len(points) == 10
    weights = {p.time: p.weight for p in points}
    assert weights[10.0] == 1.0
    assert weights[8.0] == pytest.approx(1.0 / 3.0)
    assert weights[18.0] == pytest.approx(2.0 / 3.0)
    assert weights[0.0] == 0.0


def test_missing_p_entries_are_reported():
    cfg, cmap = preset("unshared_power")
    table = PTable(interval=1, reps=1)
    with pytest.raises(MissingPEntriesError, match="missing p entries"):
        unshared_power_expected(cfg, cmap, table)


def test_no_unshared_components_gives_zero_power():
    cfg, _ = preset("setup1")
    cmap = ComponentMap(shared={1}, full_index={1: 1})
    assert unshared_power_expected(cfg, cmap, PTable(interval=1, reps=0)) == 0.0


def test_estimated_p_table_is_a_frequency():
    cfg, cmap = preset("unshared_power")
    table = estimate_p_jk(cfg, cmap, reps=40)
    assert table.reps == 40
    for key, p in table.p.items():
        assert 0.0 <= p <= 1.0
        assert table.stderr[key] <= 0.5 / math.sqrt(40) + 1e-12
    assert unshared_power_expected(cfg, cmap, table) >= 0.0
