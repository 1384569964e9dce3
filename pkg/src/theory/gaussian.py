"""Gaussian probabilities for differences of independent measurement noises."""

import math
from typing import Callable

import numpy as np
from scipy.special import erfc, ndtr

SIDES = ("geq", "lt")
QUADRATURE_NODES = 200
TAIL_CUTOFF = 40.0  # standard deviations beyond which the u-density is zero in double precision

_nodes, _weights = np.polynomial.legendre.leggauss(QUADRATURE_NODES)


def gauss_abs_diff_prob(epsilon: float, sigma: float, side: str = "geq") -> float:
    """P(|W1 - W2| >= epsilon) (``geq``) or its complement (``lt``), W_j iid N(0, sigma^2)."""
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}")
    if sigma == 0:
        geq = 1.0 if epsilon == 0 else 0.0
    elif math.isinf(epsilon):
        geq = 0.0
    else:
        # 2(1 - Phi(eps / (sigma sqrt 2))) == erfc(eps / (2 sigma))
        geq = float(erfc(epsilon / (2.0 * sigma)))
    return geq if side == "geq" else 1.0 - geq


def strip_probability(epsilon: float, sigma: float, v_probability: Callable[[np.ndarray, float], np.ndarray]) -> float:
    """P(event, |W1 - W2| < epsilon) for an event described through u = W1 - W2, v = W1 + W2.

    u and v are independent N(0, 2 sigma^2). ``v_probability(u, s)`` returns the
    conditional probability of the event given u, with s the std of v. The
    outer integral over u is split at 0 and evaluated by Gauss-Legendre.
    """
    if sigma == 0 or epsilon == 0:
        return 0.0
    s = sigma * math.sqrt(2.0)
    bound = min(epsilon, TAIL_CUTOFF * s)
    half = bound / 2.0
    total = 0.0
    for centre in (-half, half):
        u = centre + half * _nodes
        density = np.exp(-0.5 * (u / s) ** 2) / (s * math.sqrt(2.0 * math.pi))
        total += half * float(np.sum(_weights * density * v_probability(u, s)))
    return total


def proof_consistent_region(u: np.ndarray, s: float) -> np.ndarray:
    """P((W1+W2)^2/4 - W1^2 > 0 | u): the condition reduces to u (u + 2v) < 0."""
    return ndtr(-np.abs(u) / (2.0 * s))


_ROOT = math.sqrt(208.0)


def printed_region(u: np.ndarray, s: float) -> np.ndarray:
    """P(W1 W2 / 2 + W2^2 - 3 W1^2 / 4 > 0 | u): in (u, v) this is 3v^2 - 14uv - u^2 > 0."""
    r_a = u * (14.0 - _ROOT) / 6.0
    r_b = u * (14.0 + _ROOT) / 6.0
    lo, hi = np.minimum(r_a, r_b), np.maximum(r_a, r_b)
    return ndtr(lo / s) + ndtr(-hi / s)
