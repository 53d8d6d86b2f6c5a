"""Shared numeric kernels.

Small, deliberately boring building blocks used everywhere else:

  * error function / Gaussian tail wrappers with pinned accuracy,
  * an overflow-safe evaluation of exp(a)*erfc(x), which is the kernel every
    closed-form hitting-time expression reduces to,
  * deterministic adaptive quadrature with the variable changes that
    hitting-time integrands need (t^(-3/2)-type behavior at the lower end,
    heavy tails at infinity),
  * a reproducible random-stream handle built on a counter-based generator
    so substreams keyed by (seed, stream_id) are independent of scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy import special as _special
from scipy.integrate import quad as _quad

__all__ = [
    "AccuracyError",
    "IntegrandError",
    "QuadratureSpec",
    "RandomStream",
    "DEFAULT_QUADRATURE",
    "erf",
    "erfc",
    "gaussian_tail_q",
    "exp_times_erfc_scaled",
    "integrate",
]

_UINT64_SPAN = 2**64


class AccuracyError(RuntimeError):
    """Quadrature exhausted its subdivision budget before reaching tolerance."""


class IntegrandError(ValueError):
    """The integrand produced a non-finite sample inside the domain."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerance/budget contract for :func:`integrate`.

    The defaults suit densities that peak around 1e3..1e4 in SI units, where
    relative control dominates and the absolute floor only matters for
    essentially-zero tail integrals.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-9
    max_subdivisions: int = 2000

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0.0 and math.isfinite(self.abs_tol)):
            raise ValueError("abs_tol must be positive and finite")
        if not (self.rel_tol > 0.0 and math.isfinite(self.rel_tol)):
            raise ValueError("rel_tol must be positive and finite")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")


DEFAULT_QUADRATURE = QuadratureSpec()


@dataclass(frozen=True)
class RandomStream:
    """Handle for a reproducible random substream.

    Identical (seed, stream_id) pairs produce identical sample sequences on
    every run and thread schedule; distinct stream_ids are statistically
    independent. Backed by the counter-based Philox generator, so streams can
    be created in any order without jump-ahead bookkeeping.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        if not 0 <= int(self.seed) < _UINT64_SPAN:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if not 0 <= int(self.stream_id) < _UINT64_SPAN:
            raise ValueError("stream_id must fit in an unsigned 64-bit integer")

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this substream."""
        return np.random.Generator(
            np.random.Philox(key=np.array([self.seed, self.stream_id], dtype=np.uint64))
        )


def erf(x):
    """Error function, elementwise. Absolute error below 1e-12 everywhere."""
    return _special.erf(x)


def erfc(x):
    """Complementary error function 1 - erf(x), elementwise."""
    return _special.erfc(x)


def gaussian_tail_q(x):
    """Standard normal tail probability Q(x) = P(Z > x) = 0.5*erfc(x/sqrt(2))."""
    return 0.5 * _special.erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def exp_times_erfc_scaled(a, x):
    """Overflow-safe exp(a)*erfc(x), elementwise.

    Direct evaluation overflows once a grows past ~709 or erfc underflows;
    the product is frequently well scaled even then. For x >= 0 the scaled
    complement erfcx(x) = exp(x^2)*erfc(x) absorbs the Gaussian decay and the
    remaining exponent a - x^2 only shrinks; for x < 0, erfc(x) lies in
    [1, 2] and exp(a) is representable for |a| <= 700 as promised.
    """
    a_arr = np.asarray(a, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    scalar = a_arr.ndim == 0 and x_arr.ndim == 0
    a_b, x_b = np.broadcast_arrays(np.atleast_1d(a_arr), np.atleast_1d(x_arr))
    out = np.empty(a_b.shape, dtype=float)
    pos = x_b >= 0.0
    neg = ~pos
    out[pos] = _special.erfcx(x_b[pos]) * np.exp(a_b[pos] - x_b[pos] ** 2)
    out[neg] = np.exp(a_b[neg]) * _special.erfc(x_b[neg])
    if scalar:
        return float(out[0])
    return out


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    *,
    tail_scale: float = 1.0,
) -> Tuple[float, float]:
    """Adaptive quadrature of f over (lo, hi) with deterministic output.

    Finite intervals are integrated after the substitution t = lo + u**2,
    which flattens the sharp small-t structure of hitting-time integrands
    without harming smooth ones. An infinite upper limit is mapped through
    t = lo + tail_scale*u/(1-u) with u in [0, 1); ``tail_scale`` should be of
    the order of the integrand's characteristic width so the transformed bump
    is visible to the adaptive rule (SI-unit integrands live at 1e-6 scales).

    Returns (value, error_estimate). Raises :class:`AccuracyError` when the
    subdivision budget is exhausted and :class:`IntegrandError` on a
    non-finite sample.
    """
    if not math.isfinite(lo):
        raise ValueError("lower limit must be finite")
    if not hi > lo:
        raise ValueError("upper limit must exceed lower limit")
    if not (tail_scale > 0.0 and math.isfinite(tail_scale)):
        raise ValueError("tail_scale must be positive and finite")

    if math.isinf(hi):
        def transformed(u: float) -> float:
            w = 1.0 - u
            if w <= 0.0:
                return 0.0
            t = lo + tail_scale * u / w
            val = f(t) * tail_scale / (w * w)
            if not math.isfinite(val):
                raise IntegrandError(f"non-finite integrand sample at t={t!r}")
            return val

        a, b = 0.0, 1.0
    else:
        def transformed(u: float) -> float:
            t = lo + u * u
            val = f(t) * 2.0 * u
            if not math.isfinite(val):
                raise IntegrandError(f"non-finite integrand sample at t={t!r}")
            return val

        a, b = 0.0, math.sqrt(hi - lo)

    result = _quad(
        transformed,
        a,
        b,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=spec.max_subdivisions,
        full_output=1,
    )
    if len(result) > 3:
        raise AccuracyError(str(result[3]))
    value, err_estimate = result[0], result[1]
    return float(value), float(err_estimate)
