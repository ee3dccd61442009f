"""Couplings, tail sums, boundary fields, Hamiltonians."""

import itertools
import math

import numpy as np
import pytest

from longrange_ising import model as m
from longrange_ising.util import CapacityError

PI2_6 = math.pi ** 2 / 6.0


# ---------------------------------------------------------------------------
# coupling values


def test_coupling_power_law_direct():
    spec = m.PowerLaw(1.0, 2.0)
    assert m.coupling_value(spec, 0, 2) == 0.25
    assert m.coupling_value(spec, 5, 3) == 0.25


def test_coupling_nn_cutoff():
    spec = m.NearestNeighbor(1.0)
    assert m.coupling_value(spec, 0, 2) == 0.0
    assert m.coupling_value(spec, 0, 1) == 1.0


def test_coupling_axes_off_axis_zero():
    spec = m.AnisotropicAxes(1.5, "nn")
    assert m.coupling_value(spec, (0, 0), (1, 1)) == 0.0
    assert m.coupling_value(spec, (0, 0), (3, 0)) == 3.0 ** -1.5
    assert m.coupling_value(spec, (2, 0), (2, 1)) == 1.0
    assert m.coupling_value(spec, (2, 0), (2, 3)) == 0.0


def test_coupling_same_site_rejected():
    with pytest.raises(ValueError):
        m.coupling_value(m.PowerLaw(1.0, 1.5), 3, 3)


def test_coupling_symmetry_random_pairs():
    rng = np.random.default_rng(0)
    specs = [m.PowerLaw(0.7, 1.9), m.IsotropicMixed(4.0, 2.5),
             m.AnisotropicAxes(1.5, 2.2), m.NearestNeighbor(2.0)]
    for spec in specs:
        for _ in range(50):
            if isinstance(spec, (m.AnisotropicAxes,)) or \
                    (isinstance(spec, (m.PowerLaw, m.IsotropicMixed)) and rng.random() < 0.5):
                x = tuple(rng.integers(-6, 7, 2))
                y = tuple(rng.integers(-6, 7, 2))
            else:
                x, y = int(rng.integers(-9, 9)), int(rng.integers(-9, 9))
            if x == y:
                continue
            a = m.coupling_value(spec, x, y)
            assert a == m.coupling_value(spec, y, x)
            assert a >= 0.0


def test_antiferromagnetic_rejected():
    with pytest.raises(ValueError):
        m.PowerLaw(-1.0, 1.5)
    with pytest.raises(ValueError):
        m.NearestNeighbor(-0.5)


def test_summability_validation():
    with pytest.raises(ValueError):
        m.validate_coupling(m.PowerLaw(1.0, 1.5), 2)
    with pytest.raises(ValueError):
        m.PowerLaw(1.0, 0.9)
    with pytest.raises(ValueError):
        m.AnisotropicAxes(0.9, "nn")


# ---------------------------------------------------------------------------
# tail sums


def test_tail_analytic_values():
    assert m.tail_coupling_sum(2.0, 1) == pytest.approx(PI2_6 - 1.0, abs=1e-14)
    assert m.tail_coupling_sum(2.0, 0) == pytest.approx(PI2_6, abs=1e-13)


def test_tail_divergent_rejected():
    with pytest.raises(ValueError):
        m.tail_coupling_sum(1.0, 5)


def test_tail_against_brute_partial_sum():
    # 1e7-term partial sum plus an integral bracket midpoint, good to ~2e-11
    alpha, N = 1.5, 100
    M = 10_000_000
    ks = np.arange(N + 1, M + 1, dtype=np.float64)
    partial = float(np.sum(ks ** -alpha))
    lower = M ** (1 - alpha) / (alpha - 1)       # integral from M
    upper = (M + 1) ** (1 - alpha) / (alpha - 1)
    oracle = partial + 0.5 * (lower + upper)
    assert m.tail_coupling_sum(alpha, N) == pytest.approx(oracle, abs=1e-10)


def test_alternating_tail_analytic():
    # sum_{k >= 1} (-1)^k k^-a = -(1 - 2^(1-a)) zeta(a); zeta via our tail
    for alpha in (1.5, 2.0, 3.0):
        zeta = m.tail_coupling_sum(alpha, 0)
        want = -(1.0 - 2.0 ** (1.0 - alpha)) * zeta
        assert m.alternating_tail(alpha, 0.0, 0) == pytest.approx(want, abs=1e-13)


def test_alternating_tail_brute():
    alpha, shift, start = 1.7, 3.0, 5
    ks = np.arange(start + 1, 2_000_001, dtype=np.float64)
    brute = float(np.sum((-1.0) ** ks * (ks + shift) ** -alpha))
    assert m.alternating_tail(alpha, shift, start) == pytest.approx(brute, abs=1e-9)


# ---------------------------------------------------------------------------
# boundary fields


def test_boundary_field_plus_analytic():
    vol = m.Volume(1, 1)
    got = m.boundary_field(vol, m.PowerLaw(1.0, 2.0), m.plus_bc(), 0)
    assert got == pytest.approx(2.0 * (PI2_6 - 1.0), abs=1e-12)


def test_boundary_field_free_zero():
    vol = m.Volume(1, 3)
    for x in vol.sites():
        assert m.boundary_field(vol, m.PowerLaw(1.0, 1.5), m.free_bc(), x) == 0.0


def test_boundary_field_dobrushin_center_cancels():
    vol = m.Volume(1, 4)
    for alpha in (1.2, 1.5, 2.0, 3.0):
        got = m.boundary_field(vol, m.PowerLaw(1.0, alpha), m.dobrushin1d_bc(), 0)
        assert got == pytest.approx(0.0, abs=1e-14)


def test_boundary_field_alternating_brute():
    vol = m.Volume(1, 2)
    alpha = 1.6
    for x in vol.sites():
        got = m.boundary_field(vol, m.PowerLaw(1.0, alpha), m.alternating_bc(), x)
        ys = np.arange(3, 3_000_000)
        right = np.sum((-1.0) ** ys * (ys - x) ** -alpha)
        left = np.sum((-1.0) ** ys * (ys + x) ** -alpha)
        assert got == pytest.approx(float(right + left), abs=1e-8)


def test_boundary_field_tail_crossover_doubling():
    vol = m.Volume(1, 3)
    for spec in (m.PowerLaw(1.0, 1.5), m.IsotropicMixed(9.0, 1.8)):
        for bc in (m.plus_bc(), m.alternating_bc(), m.dobrushin1d_bc()):
            for x in (-3, 0, 2):
                a = m.boundary_field(vol, spec, bc, x, em_crossover=10_000)
                b = m.boundary_field(vol, spec, bc, x, em_crossover=20_000)
                assert abs(a - b) < 1e-10


def test_boundary_field_2d_isotropic_brute():
    vol = m.Volume(2, 2)
    alpha = 4.0
    bc = m.dobrushin2d_bc(0)
    R = 400
    ring_bound = 8.0 * R ** (2 - alpha) / (alpha - 2)
    for x in [(0, 0), (2, -1), (-2, 2)]:
        got = m.boundary_field(vol, m.PowerLaw(1.0, alpha), bc, x)
        brute = 0.0
        for y1 in range(x[0] - R, x[0] + R + 1):
            for y2 in range(x[1] - R, x[1] + R + 1):
                if vol.contains((y1, y2)):
                    continue
                s = bc.spin_at((y1, y2))
                brute += s * math.hypot(y1 - x[0], y2 - x[1]) ** -alpha
        assert abs(got - brute) < ring_bound + 1e-12


def test_boundary_field_2d_axes_brute():
    vol = m.Volume(2, 2)
    spec = m.AnisotropicAxes(1.5, 2.5)
    bc = m.dobrushin2d_bc(0)
    R = 2_000_000
    trunc = 5.0 * R ** -0.5          # two horizontal rays each drop ~2 R^-0.5
    for x in [(0, 0), (2, 1), (-1, -2)]:
        got = m.boundary_field(vol, spec, bc, x)
        ys = np.arange(3, R)
        horiz_sign = 1.0 if x[1] >= 0 else -1.0
        brute = horiz_sign * float(np.sum((ys - x[0]) ** -1.5) + np.sum((ys + x[0]) ** -1.5))
        up = float(np.sum((ys - x[1]) ** -2.5))
        down = float(np.sum((ys + x[1]) ** -2.5))
        brute += up - down
        assert abs(got - brute) < trunc


def test_boundary_field_requires_interior_site():
    with pytest.raises(ValueError):
        m.boundary_field(m.Volume(1, 2), m.PowerLaw(1.0, 1.5), m.plus_bc(), 5)


def test_boundary_field_2d_nearest_neighbor():
    vol = m.Volume(2, 1)
    spec = m.NearestNeighbor(2.0)
    bc = m.dobrushin2d_bc(0)
    # corner touches one exterior column site (above: +) and one row site
    assert m.boundary_field(vol, spec, bc, (1, 1)) == pytest.approx(4.0)
    assert m.boundary_field(vol, spec, bc, (0, 0)) == pytest.approx(0.0)
    assert m.boundary_field(vol, spec, bc, (0, -1)) == pytest.approx(-2.0)


def test_alternating_fill_rejected_in_2d():
    vol = m.Volume(2, 1)
    bc = m.BoundaryCondition(
        (m.RegionRule(m.Everywhere(), m.AlternatingFill()),), name="bad2d")
    with pytest.raises(ValueError):
        m.boundary_field(vol, m.PowerLaw(1.0, 3.0), bc, (0, 0))
    with pytest.raises(ValueError):
        m.boundary_field(vol, m.AnisotropicAxes(1.5, "nn"), bc, (0, 0))


# ---------------------------------------------------------------------------
# Hamiltonian and kernel


def test_hamiltonian_single_site_plus():
    vol = m.Volume(1, 0)
    params = m.ModelParams(1.0, m.NearestNeighbor(1.0))
    assert m.hamiltonian(vol, params, m.plus_bc(), [1]) == pytest.approx(-2.0)


def test_hamiltonian_pair_counted_once():
    # three-site free chain: H = -(s0 s1 + s1 s2)
    vol = m.Volume(1, 1)
    params = m.ModelParams(1.0, m.NearestNeighbor(1.0))
    assert m.hamiltonian(vol, params, m.free_bc(), [1, 1, 1]) == pytest.approx(-2.0)
    assert m.hamiltonian(vol, params, m.free_bc(), [1, 1, -1]) == pytest.approx(0.0)


def test_hamiltonian_brute_oracle():
    vol = m.Volume(1, 3)
    params = m.ModelParams(1.0, m.PowerLaw(0.8, 1.7))
    bc = m.alternating_bc()
    rng = np.random.default_rng(1)
    sites = vol.sites()
    for _ in range(20):
        cfg = m.random_configuration(vol, rng)
        H = 0.0
        for i, x in enumerate(sites):
            for y in sites[i + 1:]:
                H -= m.coupling_value(params.coupling, x, y) * cfg[vol.index(x)] * cfg[vol.index(y)]
            H -= cfg[vol.index(x)] * m.boundary_field(vol, params.coupling, bc, x)
        assert m.hamiltonian(vol, params, bc, cfg) == pytest.approx(H, abs=1e-12)


def test_global_flip_symmetry_exhaustive():
    vol = m.Volume(1, 2)
    params = m.ModelParams(1.0, m.PowerLaw(1.0, 1.5))
    for bc in (m.plus_bc(), m.dobrushin1d_bc(), m.alternating_bc()):
        flipped = bc.flipped()
        for bits in itertools.product((-1, 1), repeat=vol.n_sites):
            cfg = np.array(bits, dtype=np.int8)
            assert m.hamiltonian(vol, params, bc, cfg) == pytest.approx(
                m.hamiltonian(vol, params, flipped, -cfg), abs=1e-11)


def test_global_flip_symmetry_eleven_sites_vectorized():
    # flipping every spin maps configuration index i to its bit complement,
    # so the flipped-boundary energy array must be the reverse of the original
    from longrange_ising.exact import _reduce
    from longrange_ising.util import iter_spin_blocks
    vol = m.Volume(1, 5)
    params = m.ModelParams(1.0, m.PowerLaw(1.0, 1.6))
    for bc in (m.plus_bc(), m.dobrushin1d_bc(), m.alternating_bc()):
        energies = {}
        for which, b in (("base", bc), ("flip", bc.flipped())):
            sys_ = _reduce(vol, params, b, {})
            parts = [sys_.log_weights(S) for _, S in iter_spin_blocks(vol.n_sites)]
            energies[which] = -np.concatenate(parts) / params.beta
        assert np.max(np.abs(energies["base"] - energies["flip"][::-1])) < 1e-10


def test_translation_covariance():
    # master pattern on Z; shifting the window and the exterior together
    # leaves the energy unchanged
    # the centered-coordinate machinery must reproduce the energy of an
    # off-center window of one fixed infinite pattern (random core, plus tail)
    rng = np.random.default_rng(3)
    core = {i: (int(1 - 2 * rng.integers(0, 2)) if abs(i) <= 15 else 1)
            for i in range(-60, 61)}

    def psi(i):
        return core[i] if -60 <= i <= 60 else 1

    L, alpha = 2, 1.7
    spec = m.PowerLaw(1.0, alpha)
    params = m.ModelParams(1.0, spec)
    vol = m.Volume(1, L)
    Y = 500_000

    def brute_window(shift):
        window = list(range(shift - L, shift + L + 1))
        ext = np.concatenate([np.arange(shift - Y, shift - L),
                              np.arange(shift + L + 1, shift + Y)])
        ext_spins = np.where(np.abs(ext) <= 60,
                             [psi(int(v)) for v in np.clip(ext, -60, 60)], 1.0)
        H = 0.0
        for a, x in enumerate(window):
            for y in window[a + 1:]:
                H -= abs(x - y) ** -alpha * psi(x) * psi(y)
            H -= psi(x) * float(np.sum(np.abs(ext - x) ** -alpha * ext_spins))
        return H

    trunc = 2 * (2 * L + 1) * 2.0 * (Y - L - 1) ** (1 - alpha) / (alpha - 1)
    for shift in (0, 5, -4):
        cfg = np.array([psi(i + shift) for i in range(-L, L + 1)], dtype=np.int8)
        pattern = {i: psi(i + shift) for i in range(-40, 41) if not -L <= i <= L}
        bc = m.pattern_bc(pattern, m.plus_bc())
        recentered = m.hamiltonian(vol, params, bc, cfg)
        assert recentered == pytest.approx(brute_window(shift), abs=trunc)


def test_energy_delta_consistency():
    vol = m.Volume(1, 3)
    params = m.ModelParams(1.3, m.IsotropicMixed(2.0, 1.6))
    bc = m.dobrushin1d_bc()
    rng = np.random.default_rng(2)
    for _ in range(200):
        cfg = m.random_configuration(vol, rng)
        site = int(rng.integers(-3, 4))
        flipped = cfg.copy()
        flipped[vol.index(site)] *= -1
        direct = m.hamiltonian(vol, params, bc, flipped) - m.hamiltonian(vol, params, bc, cfg)
        assert m.energy_delta(vol, params, bc, cfg, site) == pytest.approx(direct, abs=1e-9)


def test_energy_delta_one_site():
    vol = m.Volume(1, 0)
    params = m.ModelParams(1.0, m.NearestNeighbor(1.0))
    assert m.energy_delta(vol, params, m.plus_bc(), [1], 0) == pytest.approx(4.0)


def test_energy_delta_involution():
    vol = m.Volume(1, 2)
    params = m.ModelParams(1.0, m.PowerLaw(1.0, 1.5))
    cfg = np.array([1, -1, 1, 1, -1], dtype=np.int8)
    d1 = m.energy_delta(vol, params, m.plus_bc(), cfg, 1)
    cfg2 = cfg.copy()
    cfg2[vol.index(1)] *= -1
    d2 = m.energy_delta(vol, params, m.plus_bc(), cfg2, 1)
    assert d1 + d2 == pytest.approx(0.0, abs=1e-12)


def test_kernel_infinite_temperature_uniform():
    vol = m.Volume(1, 2)
    params = m.ModelParams(0.0, m.PowerLaw(1.0, 1.5))
    cfg = np.array([1, -1, 1, -1, 1], dtype=np.int8)
    assert m.specification_kernel(vol, params, m.alternating_bc(), cfg) == \
        pytest.approx(2.0 ** -vol.n_sites, abs=1e-15)


def test_kernel_normalization_and_positivity():
    vol = m.Volume(1, 2)
    params = m.ModelParams(2.0, m.PowerLaw(1.0, 1.8))
    total = 0.0
    for bits in itertools.product((-1, 1), repeat=vol.n_sites):
        p = m.specification_kernel(vol, params, m.dobrushin1d_bc(),
                                   np.array(bits, dtype=np.int8))
        assert p > 0.0
        total += p
    assert total == pytest.approx(1.0, abs=1e-12)


def test_kernel_one_site_closed_form():
    vol = m.Volume(1, 0)
    for beta in (0.3, 1.0, 2.5):
        params = m.ModelParams(beta, m.NearestNeighbor(1.0))
        p = m.specification_kernel(vol, params, m.plus_bc(), [1])
        want = math.exp(2 * beta) / (math.exp(2 * beta) + math.exp(-2 * beta))
        assert p == pytest.approx(want, abs=1e-14)


def test_kernel_capacity_error():
    vol = m.Volume(2, 2)  # 25 sites
    params = m.ModelParams(1.0, m.AnisotropicAxes(1.5, "nn"))
    with pytest.raises(CapacityError):
        m.log_partition(vol, params, m.plus_bc())


# ---------------------------------------------------------------------------
# excess energy and decimation


def test_excess_energy_nn():
    for L in (0, 1, 5, 30):
        got = m.excess_energy(m.Volume(1, L), m.NearestNeighbor(1.0))
        assert got == pytest.approx(4.0, abs=1e-12)


def test_excess_energy_brute():
    L, alpha = 6, 1.5
    vol = m.Volume(1, L)
    got = m.excess_energy(vol, m.PowerLaw(1.0, alpha))
    M = 3_000_000
    brute = 0.0
    for x in range(-L, L + 1):
        ks = np.arange(1, M, dtype=np.float64)
        brute += float(np.sum((ks + (L - x)) ** -alpha) + np.sum((ks + (L + x)) ** -alpha))
    brute *= 2.0
    trunc = 2.0 * 2 * (2 * L + 1) * 2.0 * (M - 1) ** (1 - alpha) / (alpha - 1)
    assert brute < got < brute + trunc


def test_excess_energy_slope_alpha_15():
    from longrange_ising.contours import excess_energy_exponent_fit
    fit = excess_energy_exponent_fit(1.5, [8, 16, 32, 64, 128])
    assert abs(fit - 0.5) <= 0.05


def test_excess_energy_bounded_alpha_3():
    values = [m.excess_energy(m.Volume(1, L), m.PowerLaw(1.0, 3.0))
              for L in (16, 32, 64, 128, 256)]
    assert max(values) <= values[-1] * 1.01


def test_decimate_alternating_to_constant():
    vol = m.Volume(1, 4)
    cfg = np.array([(-1) ** i for i in range(-4, 5)], dtype=np.int8)
    out_vol, out = m.decimate(vol, cfg)
    assert out_vol.half_width == 2
    assert np.all(out == 1)


def test_decimate_constant_fixed_point():
    vol = m.Volume(1, 5)
    out_vol, out = m.decimate(vol, m.all_plus(vol))
    assert np.all(out == 1)
    out_vol2, out2 = m.decimate(out_vol, out)
    assert np.all(out2 == 1)
    assert out_vol2.half_width == 1


def test_volume_index_round_trip():
    for vol in (m.Volume(1, 4), m.Volume(2, 3)):
        assert vol.n_sites == (2 * vol.half_width + 1) ** vol.dimension
        for i, site in enumerate(vol.sites()):
            assert vol.index(site) == i
            assert vol.site(i) == site


def test_left_neighborhood_field_matches_past_field_terms():
    # single-site volume: the boundary field decomposes into the alternating
    # window, the signed annulus, the plus far past, and the plus future
    from longrange_ising.probes import past_field
    vol = m.Volume(1, 0)
    alpha, L, N, n = 1.6, 4, 16, 64
    for sign in (1, -1):
        bc = m.left_neighborhood_bc(sign, N, L)
        got = m.boundary_field(vol, m.PowerLaw(1.0, alpha), bc, 0)
        want = (past_field(sign, alpha, L, N, n, 0)
                - m.hurwitz_tail(alpha, 0.0, n - 1)   # drop the chain-tail term
                + m.tail_coupling_sum(alpha, 0))      # right side all plus
        assert got == pytest.approx(want, abs=1e-11)


def test_frozen_interval_bc_matches_conditional_freezing():
    from longrange_ising import exact as ex
    outer = m.Volume(1, 6)
    inner = m.Volume(1, 1)
    params = m.ModelParams(1.5, m.PowerLaw(1.0, 1.6))
    frozen = {s: -1 for s in range(-6, -1)}
    frozen.update({s: 1 for s in range(2, 7)})
    via_cond = ex.conditional_expectation(outer, params, m.plus_bc(), frozen,
                                          ex.spin_observable(outer, 0))
    bc = m.frozen_interval_bc(-6, -2)
    via_bc = ex.expectation(inner, params, bc, ex.spin_observable(inner, 0))
    assert via_cond == pytest.approx(via_bc, abs=1e-12)
