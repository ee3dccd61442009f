"""Sampler correctness: determinism, balance, caches, oracle agreement."""

import math

import numpy as np
import pytest

from longrange_ising import exact as ex
from longrange_ising import mcmc
from longrange_ising import model as m
from longrange_ising.util import CapacityError


def test_same_seed_bit_identical():
    vol = m.Volume(1, 3)
    params = m.ModelParams(1.0, m.PowerLaw(1.0, 1.7))
    runs = []
    for _ in range(2):
        st = mcmc.sampler_new(vol, params, m.plus_bc(), seed=99, initial="random")
        traj = []
        for _ in range(30):
            mcmc.sweep(st)
            traj.append(st.config.copy())
        runs.append((np.stack(traj), st.energy))
    assert np.array_equal(runs[0][0], runs[1][0])
    assert runs[0][1] == runs[1][1]


def test_initial_energy_matches_hamiltonian():
    vol = m.Volume(1, 4)
    params = m.ModelParams(0.8, m.IsotropicMixed(3.0, 1.6))
    st = mcmc.sampler_new(vol, params, m.dobrushin1d_bc(), seed=0, initial="plus")
    assert st.energy == pytest.approx(
        m.hamiltonian(vol, params, m.dobrushin1d_bc(), m.all_plus(vol)), abs=1e-10)


def test_capacity_errors():
    params = m.ModelParams(1.0, m.PowerLaw(1.0, 1.5))
    with pytest.raises(CapacityError):
        mcmc.sampler_new(m.Volume(1, 40_000), params, m.plus_bc(), seed=0)
    with pytest.raises(CapacityError):
        mcmc.sampler_new(m.Volume(1, 5_000), params, m.plus_bc(), seed=0,
                         max_table_bytes=1 << 20)


def test_beta_zero_metropolis_always_accepts():
    vol = m.Volume(1, 3)
    params = m.ModelParams(0.0, m.PowerLaw(1.0, 1.5))
    st = mcmc.sampler_new(vol, params, m.plus_bc(), seed=5)
    for s in vol.sites():
        assert mcmc.flip_probability(st, s) == 1.0


def test_detailed_balance_identity():
    vol = m.Volume(1, 2)
    params = m.ModelParams(0.9, m.PowerLaw(1.0, 1.5))
    bc = m.alternating_bc()
    rng = np.random.default_rng(11)
    st = mcmc.sampler_new(vol, params, bc, seed=1)
    for rule in ("metropolis", "heat_bath"):
        for _ in range(60):
            cfg = m.random_configuration(vol, rng)
            site = int(rng.integers(-2, 3))
            st.config = cfg.copy()
            st.resync()
            pi = m.specification_kernel(vol, params, bc, cfg)
            fwd = mcmc.flip_probability(st, site, rule)
            cfg2 = cfg.copy()
            cfg2[vol.index(site)] *= -1
            st.config = cfg2
            st.resync()
            pi2 = m.specification_kernel(vol, params, bc, cfg2)
            bwd = mcmc.flip_probability(st, site, rule)
            assert abs(pi * fwd - pi2 * bwd) < 1e-12


def test_energy_drift_after_sweeps():
    vol = m.Volume(1, 4)
    params = m.ModelParams(0.6, m.PowerLaw(1.0, 1.5))
    st = mcmc.sampler_new(vol, params, m.alternating_bc(), seed=3, initial="random")
    for _ in range(1000):
        mcmc.sweep(st)
    assert abs(st.energy - st.total_energy()) < 1e-6
    # field cache stays consistent too
    s = st.config.astype(np.float64)
    want = st.couplings @ s + st.static_fields
    assert np.max(np.abs(st.fields - want)) < 1e-8


def test_constant_observable_estimate():
    vol = m.Volume(1, 2)
    params = m.ModelParams(0.5, m.PowerLaw(1.0, 1.5))
    st = mcmc.sampler_new(vol, params, m.plus_bc(), seed=8)
    const = ex.Observable("one", lambda c: 1.0)
    est = mcmc.estimate(st, const, 600, 100)
    assert est.mean == 1.0
    assert est.stderr == 0.0
    assert est.tau == 0.5


def test_beta_zero_mean_near_zero():
    vol = m.Volume(1, 3)
    params = m.ModelParams(0.0, m.PowerLaw(1.0, 1.5))
    st = mcmc.sampler_new(vol, params, m.plus_bc(), seed=12, initial="random")
    est = mcmc.estimate(st, ex.spin_observable(vol, 0), 8000, 500)
    assert abs(est.mean) < 4.0 * est.stderr + 1e-12


@pytest.mark.parametrize("rule", ["metropolis", "heat_bath"])
def test_oracle_agreement(rule):
    # moderate beta keeps the chain fluctuating so the error bar is honest
    vol = m.Volume(1, 4)
    params = m.ModelParams(0.7, m.PowerLaw(1.0, 1.8))
    obs = ex.spin_observable(vol, 0)
    truth = ex.expectation(vol, params, m.plus_bc(), obs)
    st = mcmc.sampler_new(vol, params, m.plus_bc(), seed=77, initial="random")
    est = mcmc.estimate(st, obs, 30_000, 2_000, rule=rule)
    assert 1e-4 < est.stderr < 0.01
    assert abs(est.mean - truth) <= 4.0 * est.stderr


def test_frozen_sites_respected():
    vol = m.Volume(1, 3)
    params = m.ModelParams(0.7, m.PowerLaw(1.0, 1.5))
    st = mcmc.sampler_new(vol, params, m.plus_bc(), seed=4, initial="random",
                          frozen={0: -1, 2: 1})
    for _ in range(200):
        mcmc.sweep(st)
        assert st.config[vol.index(0)] == -1
        assert st.config[vol.index(2)] == 1


def test_frozen_sampler_matches_conditional_oracle():
    vol = m.Volume(1, 3)
    params = m.ModelParams(1.2, m.PowerLaw(1.0, 1.6))
    frozen = {-1: -1}
    obs = ex.spin_observable(vol, 0)
    truth = ex.conditional_expectation(vol, params, m.plus_bc(), frozen, obs)
    st = mcmc.sampler_new(vol, params, m.plus_bc(), seed=21, initial="random",
                          frozen=frozen)
    est = mcmc.estimate(st, obs, 30_000, 2_000)
    assert abs(est.mean - truth) <= 4.0 * max(est.stderr, 1e-12)


def test_monotone_in_beta():
    vol = m.Volume(1, 3)
    obs = ex.spin_observable(vol, 0)
    results = []
    for beta in (0.5, 1.0, 2.0, 4.0):
        params = m.ModelParams(beta, m.PowerLaw(1.0, 1.8))
        st = mcmc.sampler_new(vol, params, m.plus_bc(), seed=31, initial="random")
        results.append(mcmc.estimate(st, obs, 20_000, 2_000))
    for a, b in zip(results, results[1:]):
        band = 4.0 * math.hypot(a.stderr, b.stderr)
        assert b.mean >= a.mean - band


def test_replica_seeds_stable_under_extension():
    assert mcmc.replica_seeds(123, 4) == mcmc.replica_seeds(123, 8)[:4]


def test_auto_burn_in_agrees_with_oracle():
    vol = m.Volume(1, 3)
    params = m.ModelParams(0.8, m.PowerLaw(1.0, 1.7))
    obs = ex.spin_observable(vol, 0)
    truth = ex.expectation(vol, params, m.plus_bc(), obs)
    st = mcmc.sampler_new(vol, params, m.plus_bc(), seed=55, initial="minus")
    est = mcmc.estimate(st, obs, 20_000)        # burn-in chosen from tau
    assert est.n_samples < 20_000
    assert abs(est.mean - truth) <= 4.0 * max(est.stderr, 1e-4)


def test_combine_estimates():
    parts = [mcmc.Estimate(1.0, 0.1, 1.0, 100), mcmc.Estimate(3.0, 0.1, 2.0, 100)]
    merged = mcmc.combine_estimates(parts)
    assert merged.mean == pytest.approx(2.0)
    assert merged.n_samples == 200
    assert merged.stderr == pytest.approx(np.std([1.0, 3.0], ddof=1) / math.sqrt(2))


def test_estimate_site_means_consistent():
    vol = m.Volume(1, 2)
    params = m.ModelParams(0.6, m.PowerLaw(1.0, 1.6))
    st = mcmc.sampler_new(vol, params, m.dobrushin1d_bc(), seed=6, initial="random")
    out = mcmc.estimate_site_means(st, vol.sites(), 24_000, 1_000)
    for s in vol.sites():
        truth = ex.expectation(vol, params, m.dobrushin1d_bc(),
                               ex.spin_observable(vol, s))
        est = out[s]
        assert est.stderr > 1e-4
        assert abs(est.mean - truth) <= 4.0 * est.stderr
