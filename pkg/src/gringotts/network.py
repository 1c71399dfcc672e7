"""Liability networks: five named banks plus a society sink, or one monopolist.

A network holds external (non-interbank) assets per bank and a nominal
liabilities matrix with one extra trailing column for obligations to
society.  Society is a pure sink — it never pays into the system.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

import numpy as np

from .calibration import EconomyCalibration

SPLIT_BANK_NAMES = ("BofG", "KWB", "SWB", "CWF", "BWIG")
MONOPOLY_BANK_NAME = "Gringotts"

# Liability schedule of the five-bank system as shares of GDP; "soc" is the
# trailing society column.  Absent pairs owe nothing.
_SPLIT_LIABILITY_SHARES = {
    "BofG": {"KWB": 0.075, "SWB": 0.05, "BWIG": 0.075},
    "KWB": {"soc": 0.15, "BofG": 0.02, "CWF": 0.03, "BWIG": 0.075},
    "SWB": {"soc": 0.15, "BofG": 0.02, "BWIG": 0.05},
    "CWF": {"soc": 0.15, "KWB": 0.05, "BWIG": 0.05},
    "BWIG": {"soc": 0.15, "BofG": 0.02, "KWB": 0.05, "SWB": 0.05, "CWF": 0.05},
}

#: Monopolist's obligations to society, as a share of GDP.
MONOPOLY_SOCIETY_SHARE = 0.60


class SystemKind(Enum):
    MONOPOLY = "monopoly"
    SPLIT = "split"


def _frozen_array(values, shape, name):
    arr = np.ascontiguousarray(np.asarray(values, dtype=np.float64))
    if arr.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} must be finite")
    if (arr < 0).any():
        raise ValueError(f"{name} must be non-negative")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FinancialNetwork:
    """Immutable bank network over named nodes plus the society column.

    liabilities has shape (n, n+1): entry (i, j) for j < n is what bank i
    owes bank j; column n is what bank i owes society.
    """

    bank_names: tuple
    external_assets: np.ndarray
    liabilities: np.ndarray
    central_bank: Optional[int] = None

    def __post_init__(self):
        names = tuple(str(x) for x in self.bank_names)
        n = len(names)
        if n == 0:
            raise ValueError("a network needs at least one bank")
        if len(set(names)) != n:
            raise ValueError("bank names must be unique")
        ext = _frozen_array(self.external_assets, (n,), "external_assets")
        liab = _frozen_array(self.liabilities, (n, n + 1), "liabilities")
        if np.diagonal(liab[:, :n]).any():
            raise ValueError("a bank cannot owe itself")
        cb = self.central_bank
        if cb is not None:
            cb = int(cb)
            if not 0 <= cb < n:
                raise ValueError("central_bank index out of range")
        object.__setattr__(self, "bank_names", names)
        object.__setattr__(self, "external_assets", ext)
        object.__setattr__(self, "liabilities", liab)
        object.__setattr__(self, "central_bank", cb)

    def __eq__(self, other):
        if not isinstance(other, FinancialNetwork):
            return NotImplemented
        return (self.bank_names == other.bank_names
                and self.central_bank == other.central_bank
                and np.array_equal(self.external_assets, other.external_assets)
                and np.array_equal(self.liabilities, other.liabilities))

    @property
    def n_banks(self) -> int:
        return len(self.bank_names)

    @property
    def interbank_liabilities(self) -> np.ndarray:
        return self.liabilities[:, : self.n_banks]

    @property
    def society_liabilities(self) -> np.ndarray:
        return self.liabilities[:, self.n_banks]

    @property
    def total_obligations(self) -> np.ndarray:
        return self.liabilities.sum(axis=1)

    def relative_liabilities(self):
        return relative_liabilities(self)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "banks": list(self.bank_names),
            "external_assets": self.external_assets.tolist(),
            "liabilities": self.liabilities.tolist(),
            "central_bank": self.central_bank,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "FinancialNetwork":
        try:
            return cls(
                bank_names=tuple(data["banks"]),
                external_assets=data["external_assets"],
                liabilities=data["liabilities"],
                central_bank=data.get("central_bank"),
            )
        except KeyError as missing:
            raise ValueError(f"network JSON lacks required key {missing}") from None

    @classmethod
    def from_json(cls, text: str) -> "FinancialNetwork":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "FinancialNetwork":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def relative_liabilities(net: FinancialNetwork):
    """Total obligations p̄ and the relative-liability matrix π.

    π rows sum to one wherever p̄ > 0 and are all-zero where p̄ = 0.
    """
    pbar = net.total_obligations
    pi = np.zeros_like(net.liabilities)
    positive = pbar > 0
    pi[positive] = net.liabilities[positive] / pbar[positive, None]
    pi.setflags(write=False)
    return pbar, pi


def build_split_network(calib: EconomyCalibration) -> FinancialNetwork:
    """Five-bank system; asset and liability schedule scales with GDP.

    External assets: the central bank holds its configured share of GDP
    (11% by default); the remaining banking assets split evenly across the
    other four institutions (22.25% each at defaults).
    """
    gdp = calib.gdp_galleons
    if gdp <= 0:
        raise ValueError("calibrated gdp must be positive")
    cb_share = calib.inputs.central_bank_share_of_gdp
    other_share = (calib.inputs.banking_assets_share_of_gdp - cb_share) / 4.0
    shares = [cb_share] + [other_share] * 4
    external = gdp * np.array(shares)

    n = len(SPLIT_BANK_NAMES)
    col = {name: j for j, name in enumerate(SPLIT_BANK_NAMES)}
    col["soc"] = n
    liab = np.zeros((n, n + 1))
    for row_name, owes in _SPLIT_LIABILITY_SHARES.items():
        i = col[row_name]
        for col_name, share in owes.items():
            liab[i, col[col_name]] = share * gdp
    return FinancialNetwork(
        bank_names=SPLIT_BANK_NAMES,
        external_assets=external,
        liabilities=liab,
        central_bank=0,
    )


def build_monopoly_network(calib: EconomyCalibration) -> FinancialNetwork:
    """Single-bank status quo: all banking assets, one society obligation."""
    gdp = calib.gdp_galleons
    if gdp <= 0:
        raise ValueError("calibrated gdp must be positive")
    liab = np.array([[0.0, MONOPOLY_SOCIETY_SHARE * gdp]])
    return FinancialNetwork(
        bank_names=(MONOPOLY_BANK_NAME,),
        external_assets=np.array([calib.total_bank_assets_galleons]),
        liabilities=liab,
        central_bank=0,
    )


def build_network(calib: EconomyCalibration, kind: SystemKind) -> FinancialNetwork:
    if kind is SystemKind.MONOPOLY:
        return build_monopoly_network(calib)
    return build_split_network(calib)


def merge(net: FinancialNetwork, subset: Iterable[int]) -> FinancialNetwork:
    """Merge a subset of banks into one entity, netting internal claims.

    The merged bank sits at the subset's lowest index and is named by
    joining the member names with '+'.  External assets and society
    obligations add up; claims between members vanish.
    """
    members = sorted({int(i) for i in subset})
    if not members:
        raise ValueError("merge subset must be non-empty")
    n = net.n_banks
    if members[0] < 0 or members[-1] >= n:
        raise ValueError("merge subset indices out of range")
    member_set = set(members)

    # old index -> new index, merged slot claimed at first appearance
    mapping = np.empty(n, dtype=np.int64)
    new_names = []
    merged_slot = -1
    for i in range(n):
        if i in member_set:
            if merged_slot < 0:
                merged_slot = len(new_names)
                new_names.append("+".join(net.bank_names[j] for j in members))
            mapping[i] = merged_slot
        else:
            mapping[i] = len(new_names)
            new_names.append(net.bank_names[i])

    m = len(new_names)
    external = np.zeros(m)
    liab = np.zeros((m, m + 1))
    old_liab = net.liabilities
    for i in range(n):
        external[mapping[i]] += net.external_assets[i]
        liab[mapping[i], m] += old_liab[i, n]
        for j in range(n):
            if mapping[i] != mapping[j]:
                liab[mapping[i], mapping[j]] += old_liab[i, j]

    cb = net.central_bank
    if cb is not None:
        cb = int(mapping[cb])
    return FinancialNetwork(
        bank_names=tuple(new_names),
        external_assets=external,
        liabilities=liab,
        central_bank=cb,
    )
