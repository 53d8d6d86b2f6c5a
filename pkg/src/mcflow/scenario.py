"""Physical scenario description and TX-RX distance statistics.

A scenario is a 1D axis along the flow: transmitter, receiver, and molecules
drift with the flow (speed v) and diffuse with their own coefficients. A
device is either anchored (zero diffusion, zero advection) or carried by the
flow (positive diffusion, advection exactly v), which yields four mobility
cases. After k elapsed slots the signed TX-RX distance is Gaussian; its
absolute value, the distance a released molecule must cover, follows a
folded-Gaussian law (a scaled noncentral chi with one degree of freedom).

All quantities are SI. The library never converts units.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MobilityCase",
    "ChannelConfig",
    "DistanceLaw",
    "DegenerateVarianceError",
    "distance_law",
    "distance_pdf",
]


class MobilityCase(enum.Enum):
    # values double as the user-facing case names (CLI --case, config keys)
    FIXED_BOTH = "fixedBoth"
    FIXED_TX_MOBILE_RX = "fixedTx_mobileRx"
    MOBILE_TX_FIXED_RX = "mobileTx_fixedRx"
    MOBILE_BOTH = "mobileBoth"


class DegenerateVarianceError(ValueError):
    """Raised where a density over the distance is requested but the distance
    is deterministic (zero accumulated variance, i.e. k = 0)."""


@dataclass(frozen=True)
class ChannelConfig:
    """Single source of truth for a physical scenario.

    A config is valid only if it lands in exactly one mobility case: an
    anchored device has D_u = 0 and v_u = 0, a mobile device has D_u > 0 and
    v_u = v. Mixed settings (diffusing but not advected, or vice versa) are
    rejected rather than silently reinterpreted.
    """

    x0_tx: float  # initial TX position (m)
    x0_rx: float  # initial RX position (m)
    D_m: float    # molecule diffusion coefficient (m^2/s)
    D_tx: float   # TX diffusion coefficient (m^2/s)
    D_rx: float   # RX diffusion coefficient (m^2/s)
    v: float      # flow speed (m/s), nonnegative
    v_tx: float   # TX advection speed, 0 or v (m/s)
    v_rx: float   # RX advection speed, 0 or v (m/s)
    T: float      # slot duration (s)

    def __post_init__(self) -> None:
        for name in ("x0_tx", "x0_rx", "D_m", "D_tx", "D_rx", "v", "v_tx", "v_rx", "T"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not self.D_m > 0.0:
            raise ValueError("D_m must be positive")
        if self.D_tx < 0.0 or self.D_rx < 0.0:
            raise ValueError("device diffusion coefficients must be nonnegative")
        if not self.T > 0.0:
            raise ValueError("slot duration T must be positive")
        if self.v < 0.0:
            raise ValueError("flow speed v must be nonnegative")
        if self.v_tx not in (0.0, self.v) or self.v_rx not in (0.0, self.v):
            raise ValueError("device advection speeds must be either 0 or v")
        if self.x0_rx - self.x0_tx == 0.0:
            raise ValueError("initial TX-RX distance must be nonzero")
        expected_v_tx = self.v if self.D_tx > 0.0 else 0.0
        expected_v_rx = self.v if self.D_rx > 0.0 else 0.0
        if self.v_tx != expected_v_tx or self.v_rx != expected_v_rx:
            raise ValueError(
                "config matches no mobility case: a device is either anchored "
                "(D_u = 0, v_u = 0) or flow-borne (D_u > 0, v_u = v)"
            )

    @property
    def d0(self) -> float:
        """Initial signed distance x0_rx - x0_tx (m)."""
        return self.x0_rx - self.x0_tx

    @property
    def r0(self) -> float:
        """Initial Euclidean distance |d0| (m)."""
        return abs(self.d0)

    @property
    def D_tot(self) -> float:
        """Combined device diffusion D_tx + D_rx (m^2/s)."""
        return self.D_tx + self.D_rx

    @property
    def D_eff(self) -> float:
        """Effective molecule-RX relative diffusion D_m + D_rx (m^2/s)."""
        return self.D_m + self.D_rx

    @property
    def mobility_case(self) -> MobilityCase:
        if self.D_tx > 0.0 and self.D_rx > 0.0:
            return MobilityCase.MOBILE_BOTH
        if self.D_tx > 0.0:
            return MobilityCase.MOBILE_TX_FIXED_RX
        if self.D_rx > 0.0:
            return MobilityCase.FIXED_TX_MOBILE_RX
        return MobilityCase.FIXED_BOTH


@dataclass(frozen=True)
class DistanceLaw:
    """Law of the TX-RX distance after k elapsed slots.

    The signed distance is Normal(d_bar_k, sigma2_k); the Euclidean distance
    |d_k| then has noncentrality lam = |d_bar_k|/sigma_k (infinite at k = 0
    where the distance is deterministic). v_star is the signed drift the
    released molecule sees toward the receiver in the frame where the
    receiver rests.
    """

    k: int
    d_bar_k: float   # mean signed distance (m)
    sigma2_k: float  # distance variance (m^2)
    lam: float       # noncentrality, dimensionless
    D_eff: float     # m^2/s
    D_tot: float     # m^2/s
    v_star: float    # signed effective drift (m/s)


def _sgn(x: float) -> float:
    # sgn(0) := 0 so a crossing slot (d_bar_k = 0) gets zero effective drift
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


def distance_law(config: ChannelConfig, k: int) -> DistanceLaw:
    """Distance statistics after k elapsed slots (k >= 0)."""
    if k < 0:
        raise ValueError("slot index k must be nonnegative")
    d_bar = config.d0 + k * config.T * (config.v_rx - config.v_tx)
    sigma2 = 2.0 * k * config.T * config.D_tot
    lam = abs(d_bar) / math.sqrt(sigma2) if sigma2 > 0.0 else math.inf
    case = config.mobility_case
    if case in (MobilityCase.MOBILE_TX_FIXED_RX, MobilityCase.FIXED_BOTH):
        v_star = _sgn(d_bar) * config.v
    else:
        # a flow-borne receiver cancels the molecule's advection, so the
        # relative motion is driftless
        v_star = 0.0
    return DistanceLaw(
        k=int(k),
        d_bar_k=d_bar,
        sigma2_k=sigma2,
        lam=lam,
        D_eff=config.D_eff,
        D_tot=config.D_tot,
        v_star=v_star,
    )


def distance_pdf(law: DistanceLaw, r):
    """Density of the Euclidean TX-RX distance at r >= 0 (1/m), elementwise.

    The noncentral-chi density contains a modified Bessel function of order
    -1/2; through I_{-1/2}(y) = sqrt(1/(2*pi*y))*(exp(y) + exp(-y)) it folds
    into two Gaussian lobes. Evaluating the lobes directly keeps the result
    finite at large noncentrality, where exp(y) alone would overflow.
    """
    if not law.sigma2_k > 0.0:
        raise DegenerateVarianceError(
            "distance is deterministic at k = 0; no density exists"
        )
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0.0):
        raise ValueError("distance r must be nonnegative")
    sigma = math.sqrt(law.sigma2_k)
    z = r_arr / sigma
    lam = abs(law.d_bar_k) / sigma
    out = (np.exp(-0.5 * (z - lam) ** 2) + np.exp(-0.5 * (z + lam) ** 2)) / (
        sigma * math.sqrt(2.0 * math.pi)
    )
    if np.ndim(r) == 0:
        return float(out)
    return out
