"""Brute-force enumeration over all configurations of small volumes.

Ground truth for everything else: partition functions, expectations,
conditional laws, the interface-point distribution, consistency checks of
the finite-volume kernels, and correlation-inequality oracles.  Enumeration
is blockwise-vectorized; weights live in the log domain throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from . import contours, model
from .util import CapacityError, ENUMERATION_SITE_CAP, iter_spin_blocks, logsumexp


# ---------------------------------------------------------------------------
# observables


@dataclass(frozen=True)
class Observable:
    """Named function of a configuration, with a vectorized block form."""

    name: str
    fn: Callable
    block_fn: Callable = None

    def evaluate_block(self, S: np.ndarray) -> np.ndarray:
        if self.block_fn is not None:
            return self.block_fn(S)
        return np.array([self.fn(row) for row in S], dtype=np.float64)


def spin_observable(vol: model.Volume, site) -> Observable:
    i = vol.index(site)
    return Observable(f"spin[{site}]", lambda c: float(c[i]),
                      lambda S: S[:, i].astype(np.float64))


def pair_observable(vol: model.Volume, x, y) -> Observable:
    i, j = vol.index(x), vol.index(y)
    return Observable(f"pair[{x},{y}]", lambda c: float(c[i] * c[j]),
                      lambda S: (S[:, i] * S[:, j]).astype(np.float64))


def magnetization_observable(vol: model.Volume) -> Observable:
    n = vol.n_sites
    return Observable("magnetization", lambda c: float(np.sum(c)) / n,
                      lambda S: S.sum(axis=1).astype(np.float64) / n)


def pattern_indicator(vol: model.Volume, assignments: Mapping) -> Observable:
    idx = np.array([vol.index(s) for s in assignments], dtype=np.int64)
    vals = np.array([assignments[s] for s in assignments], dtype=np.int8)
    return Observable(
        f"indicator[{len(idx)} sites]",
        lambda c: float(np.all(c[idx] == vals)),
        lambda S: np.all(S[:, idx] == vals[None, :], axis=1).astype(np.float64),
    )


def increasing_observable(vol: model.Volume, weights, threshold: float = None) -> Observable:
    """Coordinatewise-increasing observable: w.s or an indicator of w.s >= t."""
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0):
        raise ValueError("increasing observables need nonnegative weights")
    if threshold is None:
        return Observable("linear-increasing", lambda c: float(w @ c),
                          lambda S: S.astype(np.float64) @ w)
    return Observable("threshold-increasing",
                      lambda c: float(w @ c >= threshold),
                      lambda S: (S.astype(np.float64) @ w >= threshold).astype(np.float64))


# ---------------------------------------------------------------------------
# enumeration core


@dataclass
class _ReducedSystem:
    """Quadratic form over the free sites after freezing a partial pattern."""

    vol: model.Volume
    free_sites: list
    J_ff: np.ndarray      # free-free couplings
    c_f: np.ndarray       # field on free sites: frozen spins + boundary + external
    beta: float

    @property
    def n_free(self) -> int:
        return len(self.free_sites)

    def log_weights(self, S: np.ndarray) -> np.ndarray:
        Sf = S.astype(np.float64)
        E = -0.5 * np.einsum("bi,bi->b", Sf @ self.J_ff, Sf) - Sf @ self.c_f
        return -self.beta * E


def _reduce(vol: model.Volume, params: model.ModelParams, bc: model.BoundaryCondition,
            frozen: Mapping = None) -> _ReducedSystem:
    frozen = dict(frozen or {})
    for site, v in frozen.items():
        if not vol.contains(site):
            raise ValueError(f"frozen site {site} outside the volume")
        if v not in (-1, 1):
            raise ValueError("frozen spins must be +-1")
    free_sites = [s for s in vol.sites() if s not in frozen]
    n_free = len(free_sites)
    if n_free > ENUMERATION_SITE_CAP:
        raise CapacityError(f"{n_free} free sites exceed the enumeration cap")
    fields = model.boundary_field_vector(vol, params.coupling, bc) \
        + model.external_field_vector(vol, params)
    rows = np.stack([model.coupling_row(vol, params.coupling, s) for s in free_sites]) \
        if n_free else np.zeros((0, vol.n_sites))
    free_idx = np.array([vol.index(s) for s in free_sites], dtype=np.int64)
    J_ff = rows[:, free_idx] if n_free else np.zeros((0, 0))
    c_f = fields[free_idx].copy() if n_free else np.zeros(0)
    if frozen:
        frozen_idx = np.array([vol.index(s) for s in frozen], dtype=np.int64)
        frozen_vals = np.array([frozen[s] for s in frozen], dtype=np.float64)
        if n_free:
            c_f += rows[:, frozen_idx] @ frozen_vals
    return _ReducedSystem(vol, free_sites, J_ff, c_f, params.beta)


def _site_means(sys: _ReducedSystem) -> tuple:
    """(logZ, per-free-site means) in one enumeration sweep."""
    parts = []
    blocks = []
    for _, S in iter_spin_blocks(sys.n_free):
        lw = sys.log_weights(S)
        parts.append(logsumexp(lw))
        blocks.append((S, lw))
    logZ = logsumexp(np.array(parts))
    acc = np.zeros(sys.n_free)
    for S, lw in blocks:
        acc += S.astype(np.float64).T @ np.exp(lw - logZ)
    return logZ, acc


def enumerate_partition(vol: model.Volume, params: model.ModelParams,
                        bc: model.BoundaryCondition) -> float:
    """log Z over all configurations of the volume."""
    return model.log_partition(vol, params, bc)


def expectation(vol: model.Volume, params: model.ModelParams,
                bc: model.BoundaryCondition, obs: Observable) -> float:
    return conditional_expectation(vol, params, bc, {}, obs)


def conditional_expectation(vol: model.Volume, params: model.ModelParams,
                            bc: model.BoundaryCondition, frozen: Mapping,
                            obs: Observable) -> float:
    """Gibbs expectation restricted to configurations matching `frozen`."""
    sys = _reduce(vol, params, bc, frozen)
    free_idx = np.array([vol.index(s) for s in sys.free_sites], dtype=np.int64)
    frozen = dict(frozen or {})
    template = np.zeros(vol.n_sites, dtype=np.int8)
    for site, v in frozen.items():
        template[vol.index(site)] = v
    parts, blocks = [], []
    for _, S in iter_spin_blocks(sys.n_free):
        lw = sys.log_weights(S)
        parts.append(logsumexp(lw))
        blocks.append((S, lw))
    logZ = logsumexp(np.array(parts))
    total = 0.0
    for S, lw in blocks:
        full = np.repeat(template[None, :], S.shape[0], axis=0)
        full[:, free_idx] = S
        total += float(obs.evaluate_block(full) @ np.exp(lw - logZ))
    return total


def conditional_site_means(vol: model.Volume, params: model.ModelParams,
                           bc: model.BoundaryCondition, frozen: Mapping = None) -> dict:
    """Exact <sigma_x> for every free site, one enumeration pass."""
    sys = _reduce(vol, params, bc, frozen)
    _, means = _site_means(sys)
    return {site: float(means[i]) for i, site in enumerate(sys.free_sites)}


# ---------------------------------------------------------------------------
# interface-point law


@dataclass(frozen=True)
class InterfaceLaw:
    """Distribution of the rescaled interface position over the theta grid."""

    grid: tuple
    masses: tuple

    def as_dict(self) -> dict:
        return dict(zip(self.grid, self.masses))


def theta_grid(L: int) -> list:
    """2L+2 admissible rescaled interface positions (k + 1/2)/L."""
    if L < 1:
        raise ValueError("interface grid needs half_width >= 1")
    return [(k + 0.5) / L for k in range(-L - 1, L + 1)]


def interface_distribution(vol: model.Volume, params: model.ModelParams,
                           bc: model.BoundaryCondition = None) -> InterfaceLaw:
    """Exact law of the interface point under minus/plus split boundaries."""
    bc = bc or model.dobrushin1d_bc()
    if vol.dimension != 1 or vol.half_width < 1:
        raise ValueError("interface law needs a 1d volume with L >= 1")
    n = vol.n_sites
    if n > ENUMERATION_SITE_CAP:
        raise CapacityError(f"{n} sites exceed the enumeration cap")
    L = vol.half_width
    grid = theta_grid(L)
    sys = _reduce(vol, params, bc, {})
    log_parts = {t: [] for t in grid}
    for _, S in iter_spin_blocks(n):
        lw = sys.log_weights(S)
        for row, w in zip(S, lw):
            point = contours.interface_point(vol, row, bc)
            log_parts[point / L].append(w)
    log_masses = {t: (logsumexp(np.array(v)) if v else -np.inf) for t, v in log_parts.items()}
    logZ = logsumexp(np.array(list(log_masses.values())))
    masses = tuple(float(np.exp(log_masses[t] - logZ)) for t in grid)
    return InterfaceLaw(tuple(grid), masses)


# ---------------------------------------------------------------------------
# consistency and inequality oracles


def dlr_consistency_check(vol: model.Volume, subvol: model.Volume,
                          params: model.ModelParams, bc: model.BoundaryCondition,
                          trials: int = None) -> float:
    """Max deviation of kernel(vol) from kernel(vol) composed with kernel(subvol).

    The inner kernel is rebuilt from scratch (couplings to the annulus spins
    plus the boundary field of the outer condition), so agreement genuinely
    tests the field machinery against plain enumeration.
    """
    if subvol.dimension != vol.dimension or subvol.half_width > vol.half_width:
        raise ValueError("subvolume must sit inside the volume")
    n = vol.n_sites
    if n > ENUMERATION_SITE_CAP:
        raise CapacityError(f"{n} sites exceed the enumeration cap")
    inner_sites = [s for s in vol.sites() if subvol.contains(s)]
    outer_sites = [s for s in vol.sites() if not subvol.contains(s)]
    order = inner_sites + outer_sites          # inner sites on the low bits
    d = len(inner_sites)
    idx = np.array([vol.index(s) for s in order], dtype=np.int64)

    J = model.coupling_matrix(vol, params.coupling)[np.ix_(idx, idx)]
    fields = (model.boundary_field_vector(vol, params.coupling, bc)
              + model.external_field_vector(vol, params))[idx]
    beta = params.beta

    # full-kernel probabilities in the permuted layout
    lw_full = np.empty(1 << n)
    for start, S in iter_spin_blocks(n):
        Sf = S.astype(np.float64)
        E = -0.5 * np.einsum("bi,bi->b", Sf @ J, Sf) - Sf @ fields
        lw_full[start:start + S.shape[0]] = -beta * E
    logZ = logsumexp(lw_full)
    p_full = np.exp(lw_full - logZ)

    # inner kernel built independently: couplings into the annulus plus the
    # outer boundary field restricted to the subvolume
    J_dd = J[:d, :d]
    J_do = J[:d, d:]
    f_d = np.array([
        model.boundary_field(vol, params.coupling, bc, s) for s in inner_sites
    ]) + (model.external_field_vector(vol, params))[ [vol.index(s) for s in inner_sites] ]

    lw_inner = np.empty(1 << n)
    for start, S in iter_spin_blocks(n):
        Sf = S.astype(np.float64)
        Sd, So = Sf[:, :d], Sf[:, d:]
        E = -0.5 * np.einsum("bi,bi->b", Sd @ J_dd, Sd) \
            - np.einsum("bi,bi->b", Sd @ J_do, So) - Sd @ f_d
        lw_inner[start:start + S.shape[0]] = -beta * E
    shape = (1 << (n - d), 1 << d)
    lw_inner = lw_inner.reshape(shape)
    inner_logZ = np.array([logsumexp(r) for r in lw_inner])
    gamma_inner = np.exp(lw_inner - inner_logZ[:, None])

    marginal = p_full.reshape(shape).sum(axis=1)
    p_composed = (marginal[:, None] * gamma_inner).ravel()

    if trials is not None and trials < p_full.size:
        rng = np.random.default_rng(0)
        pick = rng.choice(p_full.size, size=trials, replace=False)
        return float(np.max(np.abs(p_composed[pick] - p_full[pick])))
    return float(np.max(np.abs(p_composed - p_full)))


def _assert_nonnegative_environment(params, bc):
    for rule in bc.rules:
        if isinstance(rule, model.PatternRule):
            if any(v < 0 for _, v in rule.assignments):
                raise ValueError("nonnegative boundary required")
        elif isinstance(rule.fill, model.ConstFill):
            if rule.fill.value < 0:
                raise ValueError("nonnegative boundary required")
        else:
            raise ValueError("nonnegative boundary required")
    f = params.field
    if isinstance(f, (int, float)) and f < 0:
        raise ValueError("nonnegative field required")
    if isinstance(f, tuple) and any(v < 0 for v in f):
        raise ValueError("nonnegative field required")


def gks_check(vol: model.Volume, params: model.ModelParams,
              bc: model.BoundaryCondition, pairs: Sequence) -> float:
    """Min slack of the Griffiths inequalities <ss> - <s><s> >= 0, <s> >= 0."""
    _assert_nonnegative_environment(params, bc)
    slack = np.inf
    means = conditional_site_means(vol, params, bc)
    for x, y in pairs:
        pp = expectation(vol, params, bc, pair_observable(vol, x, y))
        slack = min(slack, pp - means[x] * means[y])
    slack = min(slack, min(means.values()))
    return float(slack)


def fkg_sandwich_check(vol: model.Volume, params: model.ModelParams,
                       obs: Observable, bc: model.BoundaryCondition,
                       tol: float = 1e-12) -> bool:
    """<obs>^- <= <obs>^bc <= <obs>^+ for an increasing observable."""
    lo = expectation(vol, params, model.minus_bc(), obs)
    hi = expectation(vol, params, model.plus_bc(), obs)
    mid = expectation(vol, params, bc, obs)
    return bool(lo - tol <= mid <= hi + tol)


def percus_inequality_check(vol: model.Volume, coupling: model.AnisotropicAxes,
                            beta: float, tol: float = 1e-12) -> tuple:
    """Line-0 magnetizations under split boundaries versus the decoupled
    plus-boundary chain at the same temperature.

    Returns (2d line-0 means, 1d chain means, inequality verdict).
    """
    if vol.dimension != 2:
        raise ValueError("needs a 2d volume")
    if not isinstance(coupling, model.AnisotropicAxes):
        raise ValueError("needs axis couplings")
    if vol.n_sites > ENUMERATION_SITE_CAP:
        raise CapacityError("joint enumeration needs a tiny box (<= 24 sites)")
    params2 = model.ModelParams(beta, coupling)
    means2 = conditional_site_means(vol, params2, model.dobrushin2d_bc(0))
    line0 = {x: means2[(x, 0)] for x in range(-vol.half_width, vol.half_width + 1)}

    chain_vol = model.Volume(1, vol.half_width)
    params1 = model.ModelParams(beta, model.PowerLaw(1.0, coupling.horizontal_alpha))
    chain = conditional_site_means(chain_vol, params1, model.plus_bc())

    ok = all(line0[x] >= chain[x] - tol for x in line0)
    return line0, chain, ok
