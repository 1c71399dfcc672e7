"""Pure numpy/scipy twin of the jit kernel module.

Selected by ``GRINGOTTS_BACKEND=numpy`` (or automatically when numba is not
importable).  Counter hashing matches the jit backend bit-for-bit; the
special functions delegate to scipy and agree with the jit approximations
to roughly 1e-10.
"""

import math

import numpy as np
from scipy import special as _special

BACKEND_NAME = "numpy"

_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_SEED_TAG = np.uint64(0xA0761D6478BD642F)
_SCEN_TAG = np.uint64(0xE7037ED1A0B428DB)
_LANE_TAG = np.uint64(0x8EBC6AF09C88C6E3)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV_2_53 = 2.0 ** -53


def _mix64(z):
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


def _uniform_grid(seed, scenarios, lanes):
    """Uniforms in (0,1) for a (scenario, lane) grid; wraps like C uint64."""
    with np.errstate(over="ignore"):
        h = _mix64(seed ^ _SEED_TAG)
        h = _mix64(h ^ ((scenarios + _ONE) * _SCEN_TAG))
        h = _mix64(h ^ ((lanes + _ONE) * _LANE_TAG))
    return ((h >> _S11).astype(np.float64) + 0.5) * _INV_2_53


def uniform_stream(seed, scenario, lane):
    """Uniform in (0,1) for counter (seed, scenario, lane); pure function."""
    grid = _uniform_grid(np.uint64(seed),
                         np.array([[scenario]], dtype=np.uint64),
                         np.array([lane], dtype=np.uint64))
    return float(grid[0, 0])


def normal_cdf(x):
    return _special.ndtr(x)


def normal_icdf(p):
    return _special.ndtri(p)


def beta_cdf(a, b, x):
    return _special.betainc(a, b, x)


def beta_icdf(a, b, u):
    return _special.betaincinv(a, b, u)


def sample_multipliers(seed, n_scenarios, n_banks, rho, a, b):
    scen = np.arange(n_scenarios, dtype=np.uint64)[:, None]
    lanes = np.arange(n_banks + 1, dtype=np.uint64)[None, :]
    u = _uniform_grid(np.uint64(seed), scen, lanes)
    z = _special.ndtri(u)
    g = math.sqrt(rho) * z[:, :1] + math.sqrt(1.0 - rho) * z[:, 1:]
    return _special.betaincinv(a, b, _special.ndtr(g))


def fd_clear_batch(assets, pbar, pi_ib, alpha, beta, dtol):
    """Vectorised growing-default-set solver; see the jit twin's docstring."""
    n_scen, n = assets.shape
    payments = np.tile(pbar, (n_scen, 1))
    defaulted = np.zeros((n_scen, n), dtype=bool)
    rounds = np.zeros(n_scen, dtype=np.int64)
    status = np.zeros(n_scen, dtype=np.int64)
    active = np.arange(n_scen)
    eye = np.eye(n)
    pi_to = pi_ib.T.copy()  # (i, j) = share of j's obligations owed to i
    for _ in range(n + 2):
        if active.size == 0:
            break
        rounds[active] += 1
        rec = payments[active] @ pi_ib
        grown = defaulted[active] | (assets[active] + rec < pbar - dtol)
        changed = (grown != defaulted[active]).any(axis=1)
        defaulted[active] = grown
        active = active[changed]
        if active.size == 0:
            break
        d_act = defaulted[active]
        mats = eye[None, :, :] - beta * (d_act[:, :, None] * pi_to[None, :, :])
        rhs = np.where(d_act, alpha * assets[active], pbar[None, :])
        try:
            sol = np.linalg.solve(mats, rhs[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            sol = np.empty_like(rhs)
            for row in range(mats.shape[0]):
                try:
                    sol[row] = np.linalg.solve(mats[row], rhs[row])
                except np.linalg.LinAlgError:
                    status[active[row]] = 1
                    sol[row] = payments[active[row]]
        payments[active] = np.clip(np.where(d_act, sol, pbar[None, :]), 0.0, pbar)
        bad = status[active] != 0
        if bad.any():
            active = active[~bad]
    return payments, rounds, status


def picard_clear_batch(assets, pbar, pi_ib, alpha, beta, tol, max_iter):
    """Vectorised fixed-point iteration from full payment."""
    n_scen, n = assets.shape
    payments = np.tile(pbar, (n_scen, 1))
    iters = np.zeros(n_scen, dtype=np.int64)
    status = np.zeros(n_scen, dtype=np.int64)
    active = np.arange(n_scen)
    scale = np.maximum(pbar, 1.0)
    for _ in range(max_iter):
        if active.size == 0:
            break
        iters[active] += 1
        rec = payments[active] @ pi_ib
        nxt = np.where(assets[active] + rec >= pbar[None, :],
                       pbar[None, :],
                       alpha * assets[active] + beta * rec)
        delta = (np.abs(nxt - payments[active]) / scale).max(axis=1)
        payments[active] = nxt
        active = active[delta > tol]
    status[active] = 2
    return payments, iters, status


def fd_default_trace(assets_row, pbar, pi_ib, alpha, beta, dtol):
    """Single-scenario solve that also records each round's default set.

    Test hook: lets invariants about the growing default set be checked
    directly.  Mirrors fd_clear_batch exactly.
    """
    n = pbar.shape[0]
    p = pbar.copy()
    defaulted = np.zeros(n, dtype=bool)
    trace = []
    for _ in range(n + 2):
        rec = p @ pi_ib
        grown = defaulted | (assets_row + rec < pbar - dtol)
        trace.append(grown.copy())
        if (grown == defaulted).all():
            break
        defaulted = grown
        mat = np.eye(n) - beta * (defaulted[:, None] * pi_ib.T)
        rhs = np.where(defaulted, alpha * assets_row, pbar)
        sol = np.linalg.solve(mat, rhs)
        p = np.clip(np.where(defaulted, sol, pbar), 0.0, pbar)
    return p, trace
