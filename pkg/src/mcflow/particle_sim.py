"""Particle-based Monte Carlo validation of the hitting-time densities.

Simulates the physical random walks directly: TX and RX wander until the
release instant k*T, a molecule starts at the TX position, and molecule and
RX then evolve jointly until the molecule first touches the receiver. Only
the molecule-RX gap matters, so the walk is carried out on the gap process
(relative drift v_rx - v, relative diffusion D_m + D_rx), normalized per
particle so the initial gap is positive.

Crossing detection is a per-step sign test with linear interpolation of the
crossing time. A step that ends on the same side may still have touched the
receiver in between; with ``bridge_correction`` on (the default), that event
is drawn from the endpoint-conditioned touch probability
exp(-g0*g1/(D_rel*dt)), whose time is assigned by the same interpolation
rule. The correction removes the systematic late-hit bias of the plain sign
test; the flag exists so its size can be measured.

Determinism: particles are processed in fixed blocks of ``_BLOCK``; block b
consumes its own counter-based substream keyed (seed, b), and per-block
results are concatenated in particle-index order. Output therefore depends
only on (config, k, spec), never on scheduling or worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import ChannelConfig

__all__ = [
    "SimSpec",
    "HitSample",
    "EmptySampleError",
    "default_sim_spec",
    "simulate_hits",
    "empirical_pdf",
]

_BLOCK = 16384  # particles per RNG substream
_CHUNK = 256    # steps drawn per generator call
_TINY = np.finfo(float).tiny


class EmptySampleError(ValueError):
    """No absorbed particles to build a histogram from."""


@dataclass(frozen=True)
class SimSpec:
    n_particles: int
    dt: float           # step size (s)
    t_max: float        # horizon relative to release (s)
    seed: int
    bridge_correction: bool = True

    def __post_init__(self) -> None:
        if self.n_particles < 1:
            raise ValueError("n_particles must be at least 1")
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValueError("dt must be positive and finite")
        if not (math.isfinite(self.t_max) and self.t_max >= self.dt):
            raise ValueError("t_max must be finite and at least dt")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True, eq=False)
class HitSample:
    """First-hitting times (s, relative to release) in particle-index order,
    plus the count of particles that never touched the receiver by t_max."""

    hit_times: np.ndarray
    n_missed: int

    @property
    def n_particles(self) -> int:
        return int(self.hit_times.size) + int(self.n_missed)


def default_sim_spec(
    config: ChannelConfig,
    n_particles: int,
    seed: int,
    bridge_correction: bool = True,
) -> SimSpec:
    """Defaults tuned to resolve millisecond-scale density peaks with < 1%
    discretization bias: dt = min(T, 1 ms)/1000, horizon 20 slots."""
    return SimSpec(
        n_particles=n_particles,
        dt=min(config.T, 1e-3) / 1e3,
        t_max=20.0 * config.T,
        seed=seed,
        bridge_correction=bridge_correction,
    )


def simulate_hits(config: ChannelConfig, k: int, spec: SimSpec) -> HitSample:
    """Simulate first-hitting times for molecules released after k slots."""
    if k < 0:
        raise ValueError("slot index k must be nonnegative")

    dt = spec.dt
    n_steps = max(1, int(math.floor(spec.t_max / dt + 1e-9)))
    elapsed = k * config.T

    # pre-walk collapses to a single Gaussian jump per device: a sum of
    # independent Gaussian increments is one Gaussian of the summed moments
    tx_mean = config.x0_tx + config.v_tx * elapsed
    rx_mean = config.x0_rx + config.v_rx * elapsed
    tx_std = math.sqrt(2.0 * config.D_tx * elapsed)
    rx_std = math.sqrt(2.0 * config.D_rx * elapsed)

    d_rel = config.D_m + config.D_rx
    drift_step = (config.v_rx - config.v) * dt
    sig_step = math.sqrt(2.0 * d_rel * dt)
    inv_bridge = 1.0 / (d_rel * dt)
    bridge = spec.bridge_correction

    n = spec.n_particles
    n_blocks = (n + _BLOCK - 1) // _BLOCK
    all_times = []
    n_missed = 0

    for b in range(n_blocks):
        nb = min(_BLOCK, n - b * _BLOCK)
        gen = np.random.Generator(
            np.random.Philox(key=np.array([spec.seed, b], dtype=np.uint64))
        )
        z = gen.standard_normal((nb, 2))
        gap0 = (rx_mean + rx_std * z[:, 1]) - (tx_mean + tx_std * z[:, 0])

        times = np.full(nb, np.nan)
        # a particle born on the receiver is absorbed immediately
        on_rx = gap0 == 0.0
        times[on_rx] = _TINY

        sign0 = np.sign(gap0)
        idx = np.nonzero(~on_rx)[0]
        h = np.abs(gap0[idx])                   # normalized distance to RX
        lane_drift = sign0[idx] * drift_step    # per-lane signed drift

        step = 0
        while step < n_steps and h.size:
            c_len = min(_CHUNK, n_steps - step)
            zc = gen.standard_normal((h.size, c_len))
            uc = gen.random((h.size, c_len)) if bridge else None
            t_base = step * dt
            for s in range(c_len):
                h1 = h + lane_drift + sig_step * zc[:, s]
                hit = h1 <= 0.0
                if bridge:
                    # endpoint-conditioned touch probability; drift cancels
                    # under the conditioning. Absorbed (inf) lanes give 0;
                    # crossed lanes (h1 < 0) overflow to inf but are already
                    # in the hit mask, so the overflow is inert.
                    with np.errstate(over="ignore"):
                        touch = np.exp(-(h * h1) * inv_bridge)
                    hit |= uc[:, s] < touch
                if hit.any():
                    h_hit = h[hit]
                    h1_hit = np.abs(h1[hit])
                    frac = h_hit / (h_hit + h1_hit)
                    t_hit = t_base + s * dt + dt * frac
                    times[idx[hit]] = np.maximum(t_hit, _TINY)
                    h = np.where(hit, np.inf, h1)  # absorbed lanes go inert
                else:
                    h = h1
            step += c_len
            keep = np.isfinite(h)
            if not keep.all():
                h = h[keep]
                idx = idx[keep]
                lane_drift = lane_drift[keep]

        block_hits = times[np.isfinite(times)]
        n_missed += nb - block_hits.size
        all_times.append(block_hits)

    hit_times = np.concatenate(all_times) if all_times else np.empty(0)
    return HitSample(hit_times=hit_times, n_missed=int(n_missed))


def empirical_pdf(sample: HitSample, bin_edges) -> np.ndarray:
    """Histogram density of the hit times (1/s).

    Normalized by the full particle count, so the total mass equals the
    absorbed fraction covered by the bins, never forced to 1.
    """
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("bin_edges needs at least two edges")
    if not np.all(np.diff(edges) > 0.0):
        raise ValueError("bin_edges must be strictly increasing")
    if sample.hit_times.size == 0:
        raise EmptySampleError("no absorbed particles in sample")
    counts, _ = np.histogram(sample.hit_times, bins=edges)
    return counts / (sample.n_particles * np.diff(edges))
