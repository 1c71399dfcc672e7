"""Tail risk of scenario losses and minimal capital injections.

Injection search exploits one structural fact everywhere: per-scenario loss
is componentwise non-increasing in the injection vector, so feasibility
("expected shortfall of losses within the threshold") is monotone.  The
scalar case is a plain bisection; the multi-bank case bisects the total
budget and hunts each candidate budget's simplex with a deterministic
pattern search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .clearing import (ClearingError, ClearingParams, default_detection_slack,
                       loss_weights)
from .network import FinancialNetwork
from .shocks import ScenarioSet

#: ES-vs-threshold comparison slack and bisection bracket width, as a
#: fraction of the economy scale (total unshocked external assets).
FEASIBILITY_SLACK = 1e-6
BRACKET_TOLERANCE = 1e-6
#: pattern-search step floor as a fraction of the budget under test
SEARCH_RESOLUTION = 1e-4


@dataclass(frozen=True)
class InjectionCriterion:
    """Tail level q and the acceptable expected shortfall at that level."""

    level: float
    threshold: float

    def __post_init__(self):
        if not 0.0 < self.level < 1.0:
            raise ValueError("level must lie strictly inside (0, 1)")
        if math.isnan(self.threshold) or self.threshold < 0:
            raise ValueError("threshold must be non-negative")


@dataclass(frozen=True)
class InjectionResult:
    allocation: np.ndarray
    total: float
    achieved_tail_loss: float
    criterion: InjectionCriterion
    scenario_count: int
    evaluations: int = 0

    def __post_init__(self):
        arr = np.asarray(self.allocation, dtype=np.float64).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "allocation", arr)

    def to_dict(self) -> dict:
        return {
            "allocation": self.allocation.tolist(),
            "total": self.total,
            "achieved_tail_loss": self.achieved_tail_loss,
            "level": self.criterion.level,
            "threshold": self.criterion.threshold,
            "scenarios": self.scenario_count,
            "evaluations": self.evaluations,
        }


def _tail_count(q: float, n: int) -> int:
    # ceil(q*n) with protection against float fuzz on exact products
    # (0.05 * 100 must give 5, not 6)
    return max(1, math.ceil(q * n - 1e-9))


def expected_shortfall(losses, q: float) -> float:
    """Mean of the ceil(q*N) largest losses."""
    arr = np.asarray(losses, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("losses must be non-empty")
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie strictly inside (0, 1)")
    m = _tail_count(q, arr.size)
    if m >= arr.size:
        return float(arr.mean())
    tail = np.partition(arr, arr.size - m)[arr.size - m:]
    return float(tail.mean())


class _TailEvaluator:
    """Precomputed scenario machinery: injection vector in, losses out.

    Handles the two asset layouts:

    * scenario columns match the network's banks — each bank's external
      assets are multiplied by its own column;
    * single-bank network under a multi-bank scenario set — the bank's
      shocked assets are the summed shocked split-bank assets (common
      random numbers), with ``base_assets`` supplying the split book.
    """

    def __init__(self, net: FinancialNetwork, scenarios: ScenarioSet,
                 params: ClearingParams, *, q: Optional[float] = None,
                 base_assets=None, injection_shock_exempt: bool = True,
                 central_bank_loss: str = "auto"):
        x = scenarios.multipliers
        n = net.n_banks
        if x.shape[1] == n:
            base = net.external_assets
            shocked = x * base[None, :]
            exposure = x
        elif n == 1:
            if base_assets is None:
                raise ValueError(
                    "a single-bank network under a multi-bank scenario set "
                    "needs base_assets (the split banks' external assets)")
            base = np.asarray(base_assets, dtype=np.float64)
            if base.shape != (x.shape[1],):
                raise ValueError(
                    f"base_assets must have shape ({x.shape[1]},), got {base.shape}")
            shocked = (x @ base)[:, None]
            total = base.sum()
            weights = base / total if total > 0 else np.full(x.shape[1], 1.0 / x.shape[1])
            exposure = (x @ weights)[:, None]
        else:
            raise ValueError(
                f"scenario set has {x.shape[1]} bank columns but the network "
                f"has {n} banks")

        pbar, pi = net.relative_liabilities()
        self.net = net
        self.n = n
        self.n_scenarios = x.shape[0]
        self.alpha = params.alpha
        self.beta = params.beta
        self.pbar = pbar
        self.pi_ib = np.ascontiguousarray(pi[:, :n])
        self.dtol = default_detection_slack(pbar)
        self.weights = loss_weights(net, central_bank_loss)
        self.shocked = np.ascontiguousarray(shocked)
        self.exposure = None if injection_shock_exempt else np.ascontiguousarray(exposure)
        self.full_receipts = net.interbank_liabilities.sum(axis=0)
        self.society_claims = float(net.society_liabilities.sum())
        scale = float(base.sum())
        if scale <= 0:
            scale = float(pbar.sum()) or 1.0
        self.scale = scale
        self.tail_n = _tail_count(q, self.n_scenarios) if q is not None else None
        self.evaluations = 0
        self._standalone = None

    def losses(self, injection) -> np.ndarray:
        k = np.asarray(injection, dtype=np.float64)
        if k.shape != (self.n,):
            raise ValueError(f"injection must have shape ({self.n},), got {k.shape}")
        if (k < 0).any():
            raise ValueError("injections must be non-negative")
        if self.exposure is None:
            assets = self.shocked + k[None, :]
        else:
            assets = self.shocked + k[None, :] * self.exposure
        payments, _, status = kernels.fd_clear_batch(
            assets, self.pbar, self.pi_ib, self.alpha, self.beta, self.dtol)
        if (status != 0).any():
            bad = int(np.argmax(status != 0))
            raise ClearingError("singular payment system", payments[bad], scenario=bad)
        self.evaluations += 1
        return np.maximum((self.pbar[None, :] - payments) @ self.weights, 0.0)

    def tail_loss(self, injection) -> float:
        losses = self.losses(injection)
        m = self.tail_n
        if m >= losses.size:
            return float(losses.mean())
        tail = np.partition(losses, losses.size - m)[losses.size - m:]
        return float(tail.mean())

    def standalone_shortfalls(self) -> np.ndarray:
        """Per-bank tail of the solvency gap granted full interbank receipts."""
        if self._standalone is None:
            gap = self.pbar[None, :] - self.full_receipts[None, :] - self.shocked
            np.maximum(gap, 0.0, out=gap)
            m = self.tail_n
            if m >= gap.shape[0]:
                out = gap.mean(axis=0)
            else:
                part = np.partition(gap, gap.shape[0] - m, axis=0)
                out = part[gap.shape[0] - m:, :].mean(axis=0)
            self._standalone = out
        return self._standalone

    def solvency_budget(self) -> float:
        """Total that, allocated per-bank, covers every scenario's gap."""
        gap = self.pbar[None, :] - self.full_receipts[None, :] - self.shocked
        return float(np.maximum(gap, 0.0).max(axis=0).sum())

    def _bound_tail(self, t: float) -> float:
        # Allocation-independent lower bound on every scenario's loss at
        # total budget t, from two certificates that need no clearing solve:
        #  - even granting each bank the WHOLE budget plus full receipts,
        #    banks short of p̄ certifiably default and underpay;
        #  - society's claims can't be met with more than all value present.
        avail = self.shocked + t
        insolvent = avail + self.full_receipts[None, :] < self.pbar[None, :]
        unpaid = (self.pbar[None, :] - self.alpha * avail
                  - self.beta * self.full_receipts[None, :])
        unpaid = np.where(insolvent, np.maximum(unpaid, 0.0), 0.0)
        bound = unpaid @ self.weights
        conservation = self.society_claims - (self.shocked.sum(axis=1) + t)
        np.maximum(bound, conservation, out=bound)
        np.maximum(bound, 0.0, out=bound)
        m = self.tail_n
        if m >= bound.size:
            return float(bound.mean())
        tail = np.partition(bound, bound.size - m)[bound.size - m:]
        return float(tail.mean())

    def certified_infeasible_total(self, threshold: float, slack: float) -> float:
        """Largest budget provably infeasible without running any search."""
        hi = float(self.pbar.sum())
        if hi <= 0 or not self._bound_tail(0.0) > threshold + slack:
            return 0.0
        lo = 0.0
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            if self._bound_tail(mid) > threshold + slack:
                lo = mid
            else:
                hi = mid
        return lo


def _search_simplex(ev: _TailEvaluator, t: float, threshold: float,
                    slack: float):
    """Hunt the budget-t simplex for a feasible allocation.

    Deterministic first-improvement pattern search over pairwise transfers,
    step halving from t/4 down to the 1e-4*t resolution, started from the
    proportional-to-obligations and proportional-to-standalone-shortfall
    corners and keeping the best.  Returns (found, allocation, tail_loss).
    """
    n = ev.n
    if t <= 0 or n == 1:
        k = np.full(n, max(t, 0.0) / n)
        es = ev.tail_loss(k)
        return es <= threshold + slack, k, es

    pbar_total = float(ev.pbar.sum())
    starts = []
    if pbar_total > 0:
        starts.append(t * ev.pbar / pbar_total)
    else:
        starts.append(np.full(n, t / n))
    standalone = ev.standalone_shortfalls()
    standalone_total = float(standalone.sum())
    if standalone_total > 0:
        start_b = t * standalone / standalone_total
        if not np.array_equal(start_b, starts[0]):
            starts.append(start_b)

    best_k = None
    best_es = math.inf
    for k0 in starts:
        es0 = ev.tail_loss(k0)
        if es0 <= threshold + slack:
            return True, k0, es0
        if es0 < best_es:
            best_k, best_es = k0.copy(), es0

    step = t / 4.0
    min_step = SEARCH_RESOLUTION * t
    while step >= min_step * (1.0 - 1e-12):
        for _ in range(60):  # sweep cap per step level
            improved = False
            for donor in range(n):
                amount = best_k[donor]
                if amount <= 0:
                    continue
                delta = step if step < amount else amount
                for receiver in range(n):
                    if receiver == donor:
                        continue
                    trial = best_k.copy()
                    trial[donor] = amount - delta
                    trial[receiver] += delta
                    es = ev.tail_loss(trial)
                    if es <= threshold + slack:
                        return True, trial, es
                    if es < best_es:
                        best_k, best_es = trial, es
                        improved = True
                        amount = best_k[donor]
                        if amount <= 0:
                            break
                        delta = step if step < amount else amount
            if not improved:
                break
        step *= 0.5
    return False, best_k, best_es


def _result(ev: _TailEvaluator, allocation: np.ndarray, tail_loss: float,
            criterion: InjectionCriterion) -> InjectionResult:
    return InjectionResult(
        allocation=allocation,
        total=float(np.asarray(allocation).sum()),
        achieved_tail_loss=tail_loss,
        criterion=criterion,
        scenario_count=ev.n_scenarios,
        evaluations=ev.evaluations,
    )


def loss_distribution(net: FinancialNetwork, scenarios: ScenarioSet,
                      params: ClearingParams, injection=None, *,
                      base_assets=None, injection_shock_exempt: bool = True,
                      central_bank_loss: str = "auto") -> np.ndarray:
    """Per-scenario societal losses under an optional injection vector.

    Injections are shock-exempt cash by default (added after the
    multiplier); pass injection_shock_exempt=False to invest them in the
    shocked book instead.
    """
    ev = _TailEvaluator(net, scenarios, params, base_assets=base_assets,
                        injection_shock_exempt=injection_shock_exempt,
                        central_bank_loss=central_bank_loss)
    if injection is None:
        injection = np.zeros(net.n_banks)
    return ev.losses(injection)


def minimal_injection_scalar(net: FinancialNetwork, scenarios: ScenarioSet,
                             params: ClearingParams,
                             criterion: InjectionCriterion, *,
                             base_assets=None,
                             injection_shock_exempt: bool = True,
                             central_bank_loss: str = "auto") -> InjectionResult:
    """Bisection on the single-bank injection; the feasibility map is monotone."""
    if net.n_banks != 1:
        raise ValueError("minimal_injection_scalar needs a single-bank network")
    ev = _TailEvaluator(net, scenarios, params, q=criterion.level,
                        base_assets=base_assets,
                        injection_shock_exempt=injection_shock_exempt,
                        central_bank_loss=central_bank_loss)
    slack = FEASIBILITY_SLACK * ev.scale
    es_zero = ev.tail_loss(np.zeros(1))
    if es_zero <= criterion.threshold + slack:
        return _result(ev, np.zeros(1), es_zero, criterion)
    hi = float(ev.pbar[0])
    es_hi = ev.tail_loss(np.array([hi]))
    if es_hi > criterion.threshold + slack:
        raise RuntimeError(
            "internal error: funding the full obligations failed the criterion")
    lo = 0.0
    bracket = BRACKET_TOLERANCE * ev.scale
    while hi - lo > bracket:
        mid = 0.5 * (lo + hi)
        es_mid = ev.tail_loss(np.array([mid]))
        if es_mid <= criterion.threshold + slack:
            hi, es_hi = mid, es_mid
        else:
            lo = mid
    return _result(ev, np.array([hi]), es_hi, criterion)


def minimal_injection(net: FinancialNetwork, scenarios: ScenarioSet,
                      params: ClearingParams, criterion: InjectionCriterion, *,
                      base_assets=None, injection_shock_exempt: bool = True,
                      central_bank_loss: str = "auto") -> InjectionResult:
    """Smallest total injection whose best found allocation meets the criterion.

    Outer bisection on the total budget; inner simplex pattern search per
    candidate budget.  Budgets below the allocation-independent
    infeasibility certificate are skipped without searching.  Deterministic
    given the scenario set.
    """
    ev = _TailEvaluator(net, scenarios, params, q=criterion.level,
                        base_assets=base_assets,
                        injection_shock_exempt=injection_shock_exempt,
                        central_bank_loss=central_bank_loss)
    threshold = criterion.threshold
    slack = FEASIBILITY_SLACK * ev.scale
    n = net.n_banks

    es_zero = ev.tail_loss(np.zeros(n))
    if es_zero <= threshold + slack:
        return _result(ev, np.zeros(n), es_zero, criterion)

    best_k = ev.pbar.copy()
    best_es = ev.tail_loss(best_k)
    if best_es > threshold + slack:
        raise RuntimeError(
            "internal error: funding the full obligations failed the criterion")
    hi = float(ev.pbar.sum())

    # cheap upper probe: the budget that restores solvency everywhere
    solvency = ev.solvency_budget()
    if 0 < solvency < hi:
        found, k_probe, es_probe = _search_simplex(ev, solvency, threshold, slack)
        if found:
            hi, best_k, best_es = solvency, k_probe, es_probe

    lo = min(ev.certified_infeasible_total(threshold, slack), hi)
    bracket = BRACKET_TOLERANCE * ev.scale
    while hi - lo > bracket:
        mid = 0.5 * (lo + hi)
        found, k_mid, es_mid = _search_simplex(ev, mid, threshold, slack)
        if found:
            hi, best_k, best_es = mid, k_mid, es_mid
        else:
            lo = mid
    return _result(ev, best_k, best_es, criterion)
