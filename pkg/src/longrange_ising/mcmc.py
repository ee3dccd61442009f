"""Single-spin Metropolis and heat-bath samplers for long-range couplings.

Coupling rows and boundary fields are precomputed once; every accepted flip
updates all cached local fields (O(N) per flip, row-major streaming).  The
RNG is counter-based (Philox) and seeded through SeedSequence, so replica
streams are reproducible and adding replicas never perturbs existing ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import model
from .util import CapacityError

#: Memory budget for the dense coupling table (bytes).
MAX_TABLE_BYTES = 1 << 30

#: Hard cap on sampler sites regardless of memory.
MAX_SAMPLER_SITES = 1 << 16


@dataclass
class SamplerState:
    """Mutable sampler: current spins, cached local fields, seeded RNG."""

    vol: model.Volume
    params: model.ModelParams
    bc: model.BoundaryCondition
    config: np.ndarray
    couplings: np.ndarray          # dense symmetric table, zero diagonal
    static_fields: np.ndarray      # boundary + external field per site
    fields: np.ndarray             # static + sum_y J_xy sigma_y
    energy: float
    rng: np.random.Generator
    free_index: np.ndarray
    sweeps: int = 0

    def total_energy(self) -> float:
        """Recomputed Hamiltonian (oracle for the cached value)."""
        s = self.config.astype(np.float64)
        return float(-0.5 * s @ (self.couplings @ s) - s @ self.static_fields)

    def resync(self) -> None:
        s = self.config.astype(np.float64)
        self.fields = self.couplings @ s + self.static_fields
        self.energy = self.total_energy()


def sampler_new(vol: model.Volume, params: model.ModelParams,
                bc: model.BoundaryCondition, seed: int, initial: str = "plus",
                frozen: Mapping = None,
                max_table_bytes: int = MAX_TABLE_BYTES) -> SamplerState:
    """Build a sampler with precomputed coupling table and boundary fields."""
    n = vol.n_sites
    if n > MAX_SAMPLER_SITES:
        raise CapacityError(f"{n} sites exceed the {MAX_SAMPLER_SITES}-site sampler cap")
    if 8 * n * n > max_table_bytes:
        raise CapacityError(
            f"coupling table would need {8 * n * n} bytes (cap {max_table_bytes})"
        )
    J = np.empty((n, n), dtype=np.float64)
    for i, x in enumerate(vol.sites()):
        J[i] = model.coupling_row(vol, params.coupling, x)
    static = model.boundary_field_vector(vol, params.coupling, bc).copy() \
        + model.external_field_vector(vol, params)

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    if initial == "plus":
        cfg = model.all_plus(vol)
    elif initial == "minus":
        cfg = model.all_minus(vol)
    elif initial == "random":
        cfg = model.random_configuration(vol, rng)
    else:
        raise ValueError("initial must be plus, minus, or random")

    frozen = dict(frozen or {})
    for site, v in frozen.items():
        cfg[vol.index(site)] = v
    frozen_idx = {vol.index(s) for s in frozen}
    free_index = np.array([i for i in range(n) if i not in frozen_idx], dtype=np.int64)

    state = SamplerState(vol, params, bc, cfg, J, static,
                         np.zeros(n), 0.0, rng, free_index)
    state.resync()
    return state


def sweep(state: SamplerState, rule: str = "metropolis") -> SamplerState:
    """One pass of single-site updates over the free sites."""
    beta = state.params.beta
    cfg = state.config
    fields = state.fields
    J = state.couplings
    rng = state.rng
    if rule not in ("metropolis", "heat_bath"):
        raise ValueError("rule must be metropolis or heat_bath")
    for i in state.free_index:
        s = cfg[i]
        h = fields[i]
        if rule == "metropolis":
            dE = 2.0 * s * h
            flip = dE <= 0.0 or rng.random() < math.exp(-beta * dE)
            new = -s if flip else s
        else:
            p_plus = 1.0 / (1.0 + math.exp(-2.0 * beta * h)) if beta * h > -350 else 0.0
            new = 1 if rng.random() < p_plus else -1
        if new != s:
            cfg[i] = new
            state.energy += 2.0 * s * h
            fields += (new - s) * J[i]
    state.sweeps += 1
    return state


def flip_probability(state: SamplerState, site, rule: str = "metropolis") -> float:
    """Single-move transition probability out of the current configuration."""
    i = state.vol.index(site)
    h = float(state.couplings[i] @ state.config.astype(np.float64)
              + state.static_fields[i])
    beta = state.params.beta
    s = state.config[i]
    if rule == "metropolis":
        return min(1.0, math.exp(-beta * 2.0 * s * h))
    return 1.0 / (1.0 + math.exp(2.0 * beta * s * h))


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    tau: float                     # integrated autocorrelation time (>= 0.5)
    n_samples: int


def _integrated_tau(samples: np.ndarray) -> float:
    """Integrated autocorrelation via autocovariance with Sokal windowing."""
    n = samples.size
    x = samples - samples.mean()
    var = float(x @ x) / n
    if var == 0.0 or n < 8:
        return 0.5
    tau = 0.5
    for t in range(1, n // 4):
        rho = float(x[:-t] @ x[t:]) / ((n - t) * var)
        tau += rho
        if t >= 6.0 * tau:
            break
    return max(tau, 0.5)


def _blocking_stderr(samples: np.ndarray, n_blocks: int = 32) -> float:
    n = samples.size
    if n < n_blocks:
        return float(samples.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    usable = (n // n_blocks) * n_blocks
    blocks = samples[:usable].reshape(n_blocks, -1).mean(axis=1)
    if np.allclose(blocks, blocks[0]):
        return 0.0
    return float(blocks.std(ddof=1) / math.sqrt(n_blocks))


def estimate(state: SamplerState, obs, n_sweeps: int, burn_in: int = None,
             rule: str = "metropolis", resync_every: int = 1000) -> Estimate:
    """Run the chain and estimate <obs> with blocking error bars.

    With burn_in None, the default is ten measured autocorrelation times,
    re-estimated once on the series that survives the first cut.
    """
    record_from = 0 if burn_in is None else burn_in
    if n_sweeps <= record_from:
        raise ValueError("n_sweeps must exceed burn_in")
    samples = np.empty(n_sweeps - record_from)
    for t in range(n_sweeps):
        sweep(state, rule)
        if t >= record_from:
            samples[t - record_from] = obs.fn(state.config)
        if (t + 1) % resync_every == 0:
            state.resync()
    if burn_in is None:
        first = min(int(math.ceil(10.0 * _integrated_tau(samples))), samples.size // 2)
        tau2 = _integrated_tau(samples[first:])
        cut = min(max(first, int(math.ceil(10.0 * tau2))), samples.size // 2)
        samples = samples[cut:]
    return Estimate(float(samples.mean()), _blocking_stderr(samples),
                    _integrated_tau(samples), samples.size)


def estimate_site_means(state: SamplerState, sites: Sequence, n_sweeps: int,
                        burn_in: int, rule: str = "metropolis",
                        resync_every: int = 1000) -> dict:
    """Per-site spin estimates from one chain (shared samples)."""
    if n_sweeps <= burn_in:
        raise ValueError("n_sweeps must exceed burn_in")
    idx = np.array([state.vol.index(s) for s in sites], dtype=np.int64)
    samples = np.empty((n_sweeps - burn_in, idx.size))
    for t in range(n_sweeps):
        sweep(state, rule)
        if t >= burn_in:
            samples[t - burn_in] = state.config[idx]
        if (t + 1) % resync_every == 0:
            state.resync()
    out = {}
    for j, site in enumerate(sites):
        col = samples[:, j]
        out[site] = Estimate(float(col.mean()), _blocking_stderr(col),
                             _integrated_tau(col), col.size)
    return out


def replica_seeds(master_seed: int, n_replicas: int) -> list:
    """Stable per-replica seeds: extending the replica count never changes
    the streams already assigned."""
    children = np.random.SeedSequence(master_seed).spawn(n_replicas)
    return [int(c.generate_state(1)[0]) for c in children]


def combine_estimates(estimates: Sequence[Estimate]) -> Estimate:
    """Merge independent replicas: mean of means, scatter-based error."""
    means = np.array([e.mean for e in estimates])
    n = sum(e.n_samples for e in estimates)
    if len(means) > 1:
        err = float(means.std(ddof=1) / math.sqrt(len(means)))
    else:
        err = estimates[0].stderr
    tau = float(np.mean([e.tau for e in estimates]))
    return Estimate(float(means.mean()), err, tau, n)
