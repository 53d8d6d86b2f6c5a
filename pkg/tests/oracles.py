"""Closed-form and high-precision reference results shared by the test suite.

Everything here is derived independently of the library code paths under
test: first-passage CDFs from the reflection principle, signed-gap mixture
CDFs by direct numerical integration over the gap law, and small helpers for
binary-channel arithmetic.
"""

import math

import numpy as np
from scipy.stats import norm


def ig_cdf(r0: float, D: float, v_star: float, t):
    """Sub-CDF of the first passage of drifted Brownian motion.

    Position variance grows as 2*D*t; the barrier sits at distance r0 > 0 and
    the signed approach speed is v_star. Reflection-principle closed form,
    valid for every drift sign; the v_star < 0 limit is exp(-r0*|v_star|/D).
    """
    t_arr = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        sig = np.sqrt(2.0 * D * t_arr)
        x1 = np.where(t_arr > 0.0, (v_star * t_arr - r0) / sig, -np.inf)
        x2 = np.where(t_arr > 0.0, (-v_star * t_arr - r0) / sig, -np.inf)
    # exp(v*r0/D) overflows alone for strong positive drift; pair it with the
    # Gaussian log-CDF so only the finite product is formed
    out = norm.cdf(x1) + np.exp(v_star * r0 / D + norm.logcdf(x2))
    return np.clip(out, 0.0, 1.0)


def signed_gap_mixture_cdf(d_bar: float, sigma2: float, D: float, v: float, t,
                           n_nodes: int = 4001):
    """Physics sub-CDF for a random release gap g ~ Normal(d_bar, sigma2).

    Each molecule keeps the drift sign of its own initial gap: a molecule on
    the near side approaches the absorber at +v, one already past it recedes
    at -v. Trapezoid integration over the gap law.
    """
    sigma = math.sqrt(sigma2)
    g = np.linspace(d_bar - 8.0 * sigma, d_bar + 8.0 * sigma, n_nodes)
    g = g[np.abs(g) > 1e-30]
    w = norm.pdf(g, loc=d_bar, scale=sigma)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(t_arr.size)
    signed_v = np.where(g > 0.0, v, -v)
    for i, ti in enumerate(t_arr):
        cdf_g = ig_cdf_vec_r(np.abs(g), D, signed_v, ti)
        out[i] = np.trapezoid(w * cdf_g, g)
    return out if np.ndim(t) else float(out[0])


def ig_cdf_vec_r(r0, D: float, v_star, t: float):
    """ig_cdf vectorized over the barrier distance and the drift."""
    r0 = np.asarray(r0, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    sig = math.sqrt(2.0 * D * t)
    x1 = (v_star * t - r0) / sig
    x2 = (-v_star * t - r0) / sig
    out = norm.cdf(x1) + np.exp(v_star * r0 / D + norm.logcdf(x2))
    return np.clip(out, 0.0, 1.0)


def common_drift_mixture_cdf(d_bar: float, sigma2: float, D: float, v: float, t,
                             n_nodes: int = 4001):
    """Sub-CDF of the folded-gap mixture with one shared drift sign.

    This is the analytic model's convention: every molecule drifts at
    sgn(d_bar)*v regardless of which side of the absorber it started on.
    """
    sigma = math.sqrt(sigma2)
    v_common = math.copysign(v, d_bar) if d_bar != 0.0 else 0.0
    g = np.linspace(d_bar - 8.0 * sigma, d_bar + 8.0 * sigma, n_nodes)
    g = g[np.abs(g) > 1e-30]
    w = norm.pdf(g, loc=d_bar, scale=sigma)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(t_arr.size)
    for i, ti in enumerate(t_arr):
        cdf_g = ig_cdf_vec_r(np.abs(g), D, v_common, ti)
        out[i] = np.trapezoid(w * cdf_g, g)
    return out if np.ndim(t) else float(out[0])


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def binary_mi(p_d: float, p_fa: float, beta: float) -> float:
    """Mutual information of the binary asymmetric channel, written in the
    I = H(Y) - H(Y|X) form (a different decomposition than the library's)."""
    p_one = beta * p_d + (1.0 - beta) * p_fa
    return binary_entropy(p_one) - beta * binary_entropy(p_d) - (
        1.0 - beta
    ) * binary_entropy(p_fa)
