"""Jit-compiled numerical kernels (the default backend).

The counter hashing, copula sampling and clearing loops below are the hot
paths of the simulator, written in scalar-loop style so numba can turn them
into tight machine code.  ``_kernels_numpy`` implements the same surface
with vectorised numpy/scipy calls; ``kernels`` picks one at import time.

Contract shared by both backends:

* integer counter hashing is bit-identical (pure uint64 arithmetic);
* special functions agree to ~1e-10 (different, equally valid
  approximations);
* each backend on its own is deterministic down to the bit regardless of
  thread count or evaluation order — every array cell depends only on its
  indices and the seed.
"""

import math

import numpy as np
from numba import njit, prange

BACKEND_NAME = "numba"

# ---------------------------------------------------------------------------
# counter-based uniform stream
# ---------------------------------------------------------------------------

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
_LANE0 = np.uint64(0)
_INV_2_53 = 2.0 ** -53


@njit(cache=True)
def _mix64(z):
    # splitmix64 finalizer: full-avalanche 64-bit mixing
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(cache=True)
def _uniform(seed, scenario, lane):
    h = _mix64(seed ^ _SEED_TAG)
    h = _mix64(h ^ ((scenario + _ONE) * _SCEN_TAG))
    h = _mix64(h ^ ((lane + _ONE) * _LANE_TAG))
    # top 53 bits at half-steps: strictly inside (0, 1)
    return (np.float64(h >> _S11) + 0.5) * _INV_2_53


def uniform_stream(seed, scenario, lane):
    """Uniform in (0,1) for counter (seed, scenario, lane); pure function."""
    return float(_uniform(np.uint64(seed), np.uint64(scenario), np.uint64(lane)))


# ---------------------------------------------------------------------------
# normal distribution
# ---------------------------------------------------------------------------

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation to the normal quantile; one Halley step
# against the erfc-based CDF afterwards brings it to full double precision.
_ACK_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
          1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_ACK_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
          6.680131188771972e+01, -1.328068155288572e+01)
_ACK_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
          -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_ACK_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
          3.754408661907416e+00)
_ACK_SPLIT = 0.02425


@njit(cache=True)
def normal_cdf(x):
    return 0.5 * math.erfc(-x / _SQRT2)


@njit(cache=True)
def normal_icdf(p):
    # Work in the lower tail (1 - p is exact for p >= 0.5, and there the
    # erfc-based cdf keeps full relative precision for the polish step)
    # and reflect the result back.
    if p <= 0.0 or p >= 1.0:
        return math.nan
    flip = p > 0.5
    q = 1.0 - p if flip else p
    if q < _ACK_SPLIT:
        t = math.sqrt(-2.0 * math.log(q))
        x = (((((_ACK_C[0] * t + _ACK_C[1]) * t + _ACK_C[2]) * t + _ACK_C[3]) * t
              + _ACK_C[4]) * t + _ACK_C[5]) / \
            ((((_ACK_D[0] * t + _ACK_D[1]) * t + _ACK_D[2]) * t + _ACK_D[3]) * t + 1.0)
    else:
        t = q - 0.5
        r = t * t
        x = (((((_ACK_A[0] * r + _ACK_A[1]) * r + _ACK_A[2]) * r + _ACK_A[3]) * r
              + _ACK_A[4]) * r + _ACK_A[5]) * t / \
            (((((_ACK_B[0] * r + _ACK_B[1]) * r + _ACK_B[2]) * r + _ACK_B[3]) * r
              + _ACK_B[4]) * r + 1.0)
    err = 0.5 * math.erfc(-x / _SQRT2) - q
    u = err * _SQRT_2PI * math.exp(0.5 * x * x)
    x -= u / (1.0 + 0.5 * x * u)
    return -x if flip else x


# ---------------------------------------------------------------------------
# regularized incomplete beta and its inverse
# ---------------------------------------------------------------------------


@njit(cache=True)
def _beta_cont_frac(a, b, x):
    # modified Lentz evaluation of the incomplete-beta continued fraction
    max_iter = 300
    eps = 3.0e-16
    fpmin = 1.0e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h


@njit(cache=True)
def beta_cdf(a, b, x):
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    # continued fraction converges fast only below the distribution mean
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cont_frac(a, b, x) / a
    return 1.0 - front * _beta_cont_frac(b, a, 1.0 - x) / b


@njit(cache=True)
def beta_icdf(a, b, u):
    if u <= 0.0:
        return 0.0
    if u >= 1.0:
        return 1.0
    ln_beta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    lo = 0.0
    hi = 1.0
    x = a / (a + b)
    # bracket with plain bisection first, then safeguarded Newton
    for _ in range(10):
        if beta_cdf(a, b, x) > u:
            hi = x
        else:
            lo = x
        x = 0.5 * (lo + hi)
    for _ in range(200):
        f = beta_cdf(a, b, x) - u
        if f > 0.0:
            hi = x
        else:
            lo = x
        pdf = math.exp((a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x) - ln_beta)
        if pdf > 0.0:
            x_new = x - f / pdf
            if not (lo < x_new < hi):
                x_new = 0.5 * (lo + hi)
        else:
            x_new = 0.5 * (lo + hi)
        # relative convergence: an absolute cutoff would stop far short of
        # roots like icdf(1e-4; 0.25, 1) = 1e-16
        if abs(x_new - x) <= 4e-16 * abs(x) or hi - lo <= 4e-16 * lo:
            return x_new
        x = x_new
    return x


# ---------------------------------------------------------------------------
# correlated multiplier sampling (one-factor Gaussian copula, beta marginals)
# ---------------------------------------------------------------------------


@njit(cache=True, parallel=True)
def sample_multipliers(seed, n_scenarios, n_banks, rho, a, b):
    out = np.empty((n_scenarios, n_banks))
    load = math.sqrt(rho)
    resid = math.sqrt(1.0 - rho)
    for s in prange(n_scenarios):
        su = np.uint64(s)
        z = normal_icdf(_uniform(seed, su, _LANE0))
        for i in range(n_banks):
            e = normal_icdf(_uniform(seed, su, np.uint64(i) + _ONE))
            g = load * z + resid * e
            out[s, i] = beta_icdf(a, b, normal_cdf(g))
    return out


# ---------------------------------------------------------------------------
# clearing-payment solvers
# ---------------------------------------------------------------------------

_CHUNK = 256


@njit(cache=True)
def _gauss_solve(mat, rhs, m):
    """Solve the leading m-by-m block in place; False when singular."""
    for k in range(m):
        piv = k
        big = abs(mat[k, k])
        for r in range(k + 1, m):
            v = abs(mat[r, k])
            if v > big:
                big = v
                piv = r
        if big < 1e-14:
            return False
        if piv != k:
            for cc in range(k, m):
                tmp = mat[k, cc]
                mat[k, cc] = mat[piv, cc]
                mat[piv, cc] = tmp
            tmp = rhs[k]
            rhs[k] = rhs[piv]
            rhs[piv] = tmp
        inv_piv = 1.0 / mat[k, k]
        for r in range(k + 1, m):
            f = mat[r, k] * inv_piv
            if f != 0.0:
                mat[r, k] = 0.0
                for cc in range(k + 1, m):
                    mat[r, cc] -= f * mat[k, cc]
                rhs[r] -= f * rhs[k]
    for r in range(m - 1, -1, -1):
        acc = rhs[r]
        for cc in range(r + 1, m):
            acc -= mat[r, cc] * rhs[cc]
        rhs[r] = acc / mat[r, r]
    return True


@njit(cache=True, parallel=True)
def fd_clear_batch(assets, pbar, pi_ib, alpha, beta, dtol):
    """Greatest clearing vector per scenario via growing-default-set rounds.

    assets: (scenarios, n); pi_ib: (n, n) interbank relative liabilities,
    entry (j, i) = share of j's obligations owed to i; dtol: per-bank
    default-detection slack.  Returns (payments, rounds, status) where
    status 1 flags a singular payment subsystem.
    """
    n_scen, n = assets.shape
    payments = np.empty((n_scen, n))
    rounds = np.zeros(n_scen, np.int64)
    status = np.zeros(n_scen, np.int64)
    n_chunks = (n_scen + _CHUNK - 1) // _CHUNK
    for c in prange(n_chunks):
        start = c * _CHUNK
        stop = min(start + _CHUNK, n_scen)
        p = np.empty(n)
        defaulted = np.empty(n, np.bool_)
        members = np.empty(n, np.int64)
        mat = np.empty((n, n))
        rhs = np.empty(n)
        for s in range(start, stop):
            for i in range(n):
                p[i] = pbar[i]
                defaulted[i] = False
            n_rounds = 0
            for _ in range(n + 2):
                n_rounds += 1
                grew = False
                for i in range(n):
                    if defaulted[i]:
                        continue
                    rec = 0.0
                    for j in range(n):
                        rec += pi_ib[j, i] * p[j]
                    if assets[s, i] + rec < pbar[i] - dtol[i]:
                        defaulted[i] = True
                        grew = True
                if not grew:
                    break
                m = 0
                for i in range(n):
                    if defaulted[i]:
                        members[m] = i
                        m += 1
                # p_i - beta * sum_{j defaulted} pi(j,i) p_j
                #     = alpha * a_i + beta * sum_{j solvent} pi(j,i) pbar_j
                for r in range(m):
                    i = members[r]
                    acc = alpha * assets[s, i]
                    for j in range(n):
                        if not defaulted[j]:
                            acc += beta * pi_ib[j, i] * pbar[j]
                    rhs[r] = acc
                    for cc in range(m):
                        jj = members[cc]
                        v = -beta * pi_ib[jj, i]
                        if cc == r:
                            v += 1.0
                        mat[r, cc] = v
                if not _gauss_solve(mat, rhs, m):
                    status[s] = 1
                    break
                for r in range(m):
                    i = members[r]
                    v = rhs[r]
                    if v < 0.0:
                        v = 0.0
                    elif v > pbar[i]:
                        v = pbar[i]
                    p[i] = v
            for i in range(n):
                payments[s, i] = p[i]
            rounds[s] = n_rounds
    return payments, rounds, status


@njit(cache=True, parallel=True)
def picard_clear_batch(assets, pbar, pi_ib, alpha, beta, tol, max_iter):
    """Fixed-point iteration from full payment; monotone non-increasing.

    Returns (payments, iterations, status); status 2 = not converged
    within max_iter (payments then hold the last iterate).
    """
    n_scen, n = assets.shape
    payments = np.empty((n_scen, n))
    iters = np.zeros(n_scen, np.int64)
    status = np.zeros(n_scen, np.int64)
    n_chunks = (n_scen + _CHUNK - 1) // _CHUNK
    for c in prange(n_chunks):
        start = c * _CHUNK
        stop = min(start + _CHUNK, n_scen)
        p = np.empty(n)
        q = np.empty(n)
        for s in range(start, stop):
            for i in range(n):
                p[i] = pbar[i]
            converged = False
            it = 0
            while it < max_iter:
                it += 1
                delta = 0.0
                for i in range(n):
                    rec = 0.0
                    for j in range(n):
                        rec += pi_ib[j, i] * p[j]
                    if assets[s, i] + rec >= pbar[i]:
                        v = pbar[i]
                    else:
                        v = alpha * assets[s, i] + beta * rec
                    q[i] = v
                    scale = pbar[i] if pbar[i] > 1.0 else 1.0
                    d = abs(v - p[i]) / scale
                    if d > delta:
                        delta = d
                for i in range(n):
                    p[i] = q[i]
                if delta <= tol:
                    converged = True
                    break
            for i in range(n):
                payments[s, i] = p[i]
            iters[s] = it
            if not converged:
                status[s] = 2
    return payments, iters, status
