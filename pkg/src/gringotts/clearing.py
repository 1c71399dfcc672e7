"""Clearing payment vectors under recovery haircuts, and the societal loss.

Each bank pays its full obligations p̄ when its external assets plus
interbank receipts cover them; otherwise it defaults and creditors recover
only α of its external assets plus β of its receipts.  The solvers return
the greatest fixed point of that payment map:

* ``clear_fictitious_default`` grows the default set round by round and
  solves the induced linear system directly (at most n+1 rounds);
* ``clear_picard`` iterates the payment map from p̄ (monotone
  non-increasing), kept as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .network import FinancialNetwork

DEFAULT_TOLERANCE = 1e-12
DEFAULT_MAX_ITERATIONS = 200_000

#: how the central bank's own shortfall enters the societal loss
CENTRAL_BANK_LOSS_MODES = ("auto", "include", "exclude")


class ClearingError(RuntimeError):
    """Solver failure; carries the last payment iterate and scenario index."""

    def __init__(self, message, payments=None, scenario: Optional[int] = None):
        if scenario is not None:
            message = f"scenario {scenario}: {message}"
        super().__init__(message)
        self.payments = payments
        self.scenario = scenario


@dataclass(frozen=True)
class ClearingParams:
    """Recovery fractions and iteration limits.

    A single bankruptcy cost c means alpha = beta = 1 - c; the two stay
    independently configurable.
    """

    alpha: float = 0.9
    beta: float = 0.9
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")

    @classmethod
    def from_bankruptcy_cost(cls, cost: float, **kwargs) -> "ClearingParams":
        if not 0.0 <= cost <= 1.0:
            raise ValueError("bankruptcy cost must lie in [0, 1]")
        return cls(alpha=1.0 - cost, beta=1.0 - cost, **kwargs)


@dataclass(frozen=True)
class ClearingOutcome:
    payments: np.ndarray
    defaults: np.ndarray
    equities: np.ndarray
    societal_loss: float
    iterations: int


def default_detection_slack(pbar: np.ndarray) -> np.ndarray:
    """Per-bank slack below p̄ before a bank counts as defaulting."""
    return 1e-9 * np.maximum(1.0, pbar)


def _validate_assets(net: FinancialNetwork, shocked_assets) -> np.ndarray:
    assets = np.ascontiguousarray(np.asarray(shocked_assets, dtype=np.float64))
    if assets.shape != (net.n_banks,):
        raise ValueError(
            f"shocked_assets must have shape ({net.n_banks},), got {assets.shape}")
    if not np.isfinite(assets).all():
        raise ValueError("shocked_assets must be finite")
    if (assets < 0).any():
        raise ValueError("shocked_assets must be non-negative")
    return assets


def loss_weights(net: FinancialNetwork, central_bank_loss: str = "auto") -> np.ndarray:
    """Per-bank weight of one Galleon of payment shortfall in the loss.

    Weight = society's share of the bank's obligations, plus 1 for the
    central bank when its shortfall counts separately.  "auto" counts it
    unless the central bank owes society its entire p̄ (then the two terms
    would be the same Galleons twice).
    """
    if central_bank_loss not in CENTRAL_BANK_LOSS_MODES:
        raise ValueError(
            f"central_bank_loss must be one of {CENTRAL_BANK_LOSS_MODES}")
    pbar, pi = net.relative_liabilities()
    weights = pi[:, net.n_banks].copy()
    cb = net.central_bank
    if cb is not None:
        if central_bank_loss == "include":
            weights[cb] += 1.0
        elif central_bank_loss == "auto" and weights[cb] < 1.0:
            weights[cb] += 1.0
    return weights


def _loss_from_payments(net, payments, central_bank_loss):
    pbar = net.total_obligations
    shortfall = np.maximum(pbar - payments, 0.0)
    return float(shortfall @ loss_weights(net, central_bank_loss))


def societal_loss(outcome: ClearingOutcome, net: FinancialNetwork,
                  central_bank_loss: str = "auto") -> float:
    """Unpaid obligations to society plus the central bank's shortfall."""
    return _loss_from_payments(net, outcome.payments, central_bank_loss)


def _build_outcome(net, assets, payments, iterations, central_bank_loss):
    pbar, pi = net.relative_liabilities()
    received = payments @ pi[:, : net.n_banks]
    defaults = payments < pbar - default_detection_slack(pbar)
    equities = np.where(defaults, 0.0,
                        np.maximum(assets + received - pbar, 0.0))
    return ClearingOutcome(
        payments=payments,
        defaults=defaults,
        equities=equities,
        societal_loss=_loss_from_payments(net, payments, central_bank_loss),
        iterations=int(iterations),
    )


def clear_batch(net: FinancialNetwork, assets_matrix: np.ndarray,
                params: ClearingParams):
    """Greatest clearing payments for many scenarios at once.

    assets_matrix has shape (scenarios, n).  Returns the payments matrix;
    raises ClearingError (with the first offending scenario index) when any
    scenario's payment subsystem is singular.
    """
    assets_matrix = np.ascontiguousarray(assets_matrix, dtype=np.float64)
    pbar, pi = net.relative_liabilities()
    pi_ib = np.ascontiguousarray(pi[:, : net.n_banks])
    payments, _, status = kernels.fd_clear_batch(
        assets_matrix, pbar, pi_ib, params.alpha, params.beta,
        default_detection_slack(pbar))
    if (status != 0).any():
        bad = int(np.argmax(status != 0))
        raise ClearingError("singular payment system", payments[bad], scenario=bad)
    return payments


def clear_fictitious_default(net: FinancialNetwork, shocked_assets,
                             params: ClearingParams = ClearingParams(),
                             central_bank_loss: str = "auto") -> ClearingOutcome:
    """Direct solve: grow the default set, solve the linear payment system."""
    assets = _validate_assets(net, shocked_assets)
    pbar, pi = net.relative_liabilities()
    pi_ib = np.ascontiguousarray(pi[:, : net.n_banks])
    payments, rounds, status = kernels.fd_clear_batch(
        assets[None, :], pbar, pi_ib, params.alpha, params.beta,
        default_detection_slack(pbar))
    if status[0] != 0:
        raise ClearingError("singular payment system", payments[0])
    return _build_outcome(net, assets, payments[0], rounds[0], central_bank_loss)


def clear_picard(net: FinancialNetwork, shocked_assets,
                 params: ClearingParams = ClearingParams(),
                 central_bank_loss: str = "auto") -> ClearingOutcome:
    """Iterate the payment map from p̄; independent oracle for the direct solve."""
    assets = _validate_assets(net, shocked_assets)
    pbar, pi = net.relative_liabilities()
    pi_ib = np.ascontiguousarray(pi[:, : net.n_banks])
    payments, iters, status = kernels.picard_clear_batch(
        assets[None, :], pbar, pi_ib, params.alpha, params.beta,
        params.tolerance, params.max_iterations)
    if status[0] != 0:
        raise ClearingError(
            f"no convergence within {params.max_iterations} iterations",
            payments[0])
    return _build_outcome(net, assets, payments[0], iters[0], central_bank_loss)
