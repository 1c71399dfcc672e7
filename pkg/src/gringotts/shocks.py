"""Correlated multiplicative asset shocks.

Marginals are beta with mean 1 - mean_drop and concentration κ (a+b);
dependence comes from an equicorrelated one-factor Gaussian copula.  Every
multiplier depends only on (seed, scenario, bank, model) through a
counter-based stream, so regeneration is bit-identical no matter the
evaluation order or worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .network import FinancialNetwork

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class ShockModel:
    mean_drop: float = 0.27
    concentration: float = 10.0
    correlation: float = 0.25

    def __post_init__(self):
        if not 0.0 <= self.mean_drop < 1.0:
            raise ValueError("mean_drop must lie in [0, 1)")
        if not (self.concentration > 0 and math.isfinite(self.concentration)):
            raise ValueError("concentration must be positive")
        if not 0.0 <= self.correlation <= 1.0:
            raise ValueError("correlation must lie in [0, 1]")

    @property
    def beta_a(self) -> float:
        return (1.0 - self.mean_drop) * self.concentration

    @property
    def beta_b(self) -> float:
        # zero exactly when mean_drop = 0: degenerate no-shock multiplier 1
        return self.mean_drop * self.concentration

    @property
    def mean_multiplier(self) -> float:
        return 1.0 - self.mean_drop


@dataclass(frozen=True, eq=False)
class ScenarioSet:
    """Realized multiplier matrix (scenarios x banks) plus its provenance."""

    multipliers: np.ndarray
    seed: int
    model: ShockModel

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.multipliers, dtype=np.float64))
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("multipliers must be a non-empty 2-d matrix")
        if not np.isfinite(arr).all():
            raise ValueError("multipliers must be finite")
        if (arr < 0).any() or (arr > 1).any():
            raise ValueError("multipliers must lie in [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "multipliers", arr)
        object.__setattr__(self, "seed", int(self.seed) & _SEED_MASK)

    @property
    def n_scenarios(self) -> int:
        return self.multipliers.shape[0]

    @property
    def n_banks(self) -> int:
        return self.multipliers.shape[1]

    def write_csv(self, stream) -> None:
        """Dump as `scenario,bank,multiplier` rows, scenario-major."""
        stream.write("scenario,bank,multiplier\n")
        for s in range(self.n_scenarios):
            row = self.multipliers[s].tolist()   # repr of np scalars is noisy
            for i in range(self.n_banks):
                stream.write(f"{s},{i},{row[i]!r}\n")


def sample_scenarios(model: ShockModel, n_banks: int, n_scenarios: int,
                     seed: int) -> ScenarioSet:
    """Draw the full multiplier matrix for a model, deterministically.

    Scenario s uses lane 0 for the common factor and lane i+1 for bank i's
    idiosyncratic draw; entry (s, i) never depends on any other entry.
    """
    if n_banks < 1 or n_scenarios < 1:
        raise ValueError("n_banks and n_scenarios must be positive")
    seed = int(seed) & _SEED_MASK
    if model.beta_b == 0.0:
        multipliers = np.ones((n_scenarios, n_banks))
    else:
        multipliers = kernels.sample_multipliers(
            np.uint64(seed), n_scenarios, n_banks,
            model.correlation, model.beta_a, model.beta_b)
        multipliers = np.clip(multipliers, 0.0, 1.0)
    return ScenarioSet(multipliers=multipliers, seed=seed, model=model)


def monopoly_assets_from_split(split_net: FinancialNetwork,
                               multiplier_row) -> float:
    """Merged bank's shocked assets: the split banks' shocked assets, summed.

    Using the same realized multipliers on both systems makes the two
    comparable scenario by scenario (common random numbers).
    """
    row = np.asarray(multiplier_row, dtype=np.float64)
    if row.shape != (split_net.n_banks,):
        raise ValueError(
            f"multiplier row must have length {split_net.n_banks}, got {row.shape}")
    return float(split_net.external_assets @ row)


# -- scalar special-function surface (shared by tests and the copula) --------


def beta_inverse_cdf(u: float, a: float, b: float) -> float:
    """x with I_x(a, b) = u, to better than 1e-12 absolute."""
    if not 0.0 <= u <= 1.0:
        raise ValueError("u must lie in [0, 1]")
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    return float(kernels.beta_icdf(a, b, u))


def beta_cdf(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    return float(kernels.beta_cdf(a, b, x))


def standard_normal_cdf(z: float) -> float:
    return float(kernels.normal_cdf(z))


def standard_normal_inverse_cdf(u: float) -> float:
    if not 0.0 < u < 1.0:
        raise ValueError("u must lie strictly inside (0, 1)")
    return float(kernels.normal_icdf(u))
