"""Random-walk hitting-time sampler: determinism, limits, and density match."""

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from mcflow.particle_sim import (
    EmptySampleError,
    HitSample,
    SimSpec,
    default_sim_spec,
    empirical_pdf,
    simulate_hits,
)
from mcflow.presets import make_config
from mcflow.scenario import distance_law

from oracles import common_drift_mixture_cdf, ig_cdf, signed_gap_mixture_cdf

T = 0.3e-3


def _empirical_cdf_at(sample: HitSample, t: float) -> float:
    return float(np.count_nonzero(sample.hit_times <= t)) / sample.n_particles


def test_sim_spec_validation():
    with pytest.raises(ValueError):
        SimSpec(n_particles=0, dt=1e-6, t_max=1e-3, seed=1)
    with pytest.raises(ValueError):
        SimSpec(n_particles=10, dt=0.0, t_max=1e-3, seed=1)
    with pytest.raises(ValueError):
        SimSpec(n_particles=10, dt=1e-3, t_max=1e-4, seed=1)
    with pytest.raises(ValueError):
        SimSpec(n_particles=10, dt=1e-6, t_max=1e-3, seed=-5)


def test_default_spec_resolves_slot_scale():
    config = make_config("mobileBoth", v=1e-3, T=T)
    spec = default_sim_spec(config, 500, seed=9)
    assert spec.dt == pytest.approx(T / 1e3)
    assert spec.t_max == pytest.approx(20.0 * T)
    assert spec.n_particles == 500 and spec.seed == 9


def test_ballistic_limit_hits_at_advection_time():
    # all diffusion frozen out: molecules ride the flow across r0 = 1 um
    config = make_config("fixedBoth", v=1e-3, T=T, D_m=1e-20)
    spec = SimSpec(n_particles=1000, dt=1e-6, t_max=2e-3, seed=77)
    sample = simulate_hits(config, 0, spec)
    assert sample.n_missed == 0
    t_cross = config.r0 / config.v
    assert np.all(np.abs(sample.hit_times - t_cross) <= 2.0 * spec.dt)


def test_simulation_is_deterministic_and_in_range():
    config = make_config("fixedBoth", v=1e-3, T=T)
    spec = SimSpec(n_particles=3000, dt=1e-5, t_max=2e-3, seed=4242)
    first = simulate_hits(config, 0, spec)
    second = simulate_hits(config, 0, spec)
    np.testing.assert_array_equal(first.hit_times, second.hit_times)
    assert first.n_missed == second.n_missed
    assert first.hit_times.size + first.n_missed == 3000
    assert np.all(first.hit_times > 0.0)
    assert np.all(first.hit_times <= spec.t_max)


def test_particle_streams_do_not_depend_on_population_size():
    # growing the population only appends new walkers; existing ones replay
    config = make_config("fixedBoth", v=1e-3, T=T)
    base = SimSpec(n_particles=16384, dt=1e-5, t_max=2e-3, seed=11)
    grown = SimSpec(n_particles=16384 + 100, dt=1e-5, t_max=2e-3, seed=11)
    small = simulate_hits(config, 0, base)
    large = simulate_hits(config, 0, grown)
    n = small.hit_times.size
    np.testing.assert_array_equal(large.hit_times[:n], small.hit_times)


def test_negative_k_rejected():
    config = make_config("fixedBoth", v=1e-3, T=T)
    with pytest.raises(ValueError):
        simulate_hits(config, -1, SimSpec(n_particles=10, dt=1e-5, t_max=1e-3, seed=1))


def test_empirical_pdf_single_bin_mass_is_absorbed_fraction():
    sample = HitSample(hit_times=np.array([2e-4, 5e-4, 9e-4]), n_missed=7)
    density = empirical_pdf(sample, [0.0, 1e-3])
    assert density.shape == (1,)
    assert density[0] * 1e-3 == pytest.approx(0.3, rel=1e-12)


def test_empirical_pdf_errors():
    sample = HitSample(hit_times=np.array([]), n_missed=5)
    with pytest.raises(EmptySampleError):
        empirical_pdf(sample, [0.0, 1e-3])
    ok = HitSample(hit_times=np.array([1e-4]), n_missed=0)
    with pytest.raises(ValueError):
        empirical_pdf(ok, [1e-3])
    with pytest.raises(ValueError):
        empirical_pdf(ok, [1e-3, 1e-3])


@pytest.mark.slow
def test_static_case_histogram_matches_drifted_density():
    config = make_config("fixedBoth", v=1e-3, T=T)
    spec = SimSpec(n_particles=100_000, dt=1e-7, t_max=4e-3, seed=20240)
    sample = simulate_hits(config, 0, spec)
    edges = np.concatenate([[0.0], np.geomspace(2e-5, 4e-3, 25)])
    density = empirical_pdf(sample, edges)
    cdf = ig_cdf(config.r0, config.D_m, config.v, edges)
    true_mass = np.diff(cdf)
    emp_mass = density * np.diff(edges)
    l1 = float(np.sum(np.abs(emp_mass - true_mass)))
    assert l1 < 0.02, f"L1 distance {l1:.4f}"


@pytest.mark.slow
def test_halving_dt_barely_moves_median_cdf():
    config = make_config("fixedBoth", v=1e-3, T=T)
    t_med = brentq(
        lambda t: float(ig_cdf(config.r0, config.D_m, config.v, t)) - 0.5, 1e-5, 5e-3
    )
    coarse = simulate_hits(config, 0, SimSpec(50_000, 3e-7, 6e-3, seed=31))
    fine = simulate_hits(config, 0, SimSpec(50_000, 1.5e-7, 6e-3, seed=32))
    shift = abs(_empirical_cdf_at(coarse, t_med) - _empirical_cdf_at(fine, t_med))
    assert shift < 0.01, f"median CDF shift {shift:.4f}"


@pytest.mark.slow
def test_early_slot_mobile_tx_follows_per_particle_drift_physics():
    # With the transmitter two slots downstream-diffused, a 12% minority of
    # release positions sits past the receiver. Walkers feel the flow relative
    # to their own gap sign, so the sample must track the sign-resolved
    # mixture and visibly depart from the common-drift closed form.
    config = make_config("mobileTx_fixedRx", v=1e-3, T=T)
    law = distance_law(config, 2)
    spec = SimSpec(n_particles=50_000, dt=3e-7, t_max=20.0 * T, seed=555)
    sample = simulate_hits(config, 2, spec)
    t_grid = np.geomspace(1e-6, spec.t_max, 400)
    emp = np.array([_empirical_cdf_at(sample, t) for t in t_grid])
    truth = signed_gap_mixture_cdf(
        law.d_bar_k, law.sigma2_k, config.D_m, config.v, t_grid
    )
    model = common_drift_mixture_cdf(
        law.d_bar_k, law.sigma2_k, config.D_m, config.v, t_grid
    )
    ks_truth = float(np.max(np.abs(emp - truth)))
    ks_model = float(np.max(np.abs(emp - model)))
    assert ks_truth < 0.012, f"sample vs sign-resolved mixture: {ks_truth:.4f}"
    assert ks_model > 0.02, f"sample vs common-drift form: {ks_model:.4f}"
