"""Compiled inner loops shared by the market and gas simulators.

Everything here is strict IEEE double arithmetic (no fastmath), so results
are bit-reproducible for a fixed random stream on a given platform.
"""

import math

import numba

# Interval half-width at which the quantile bisection stops.
BISECTION_TOL = 1e-12


@numba.njit(cache=True, nogil=True)
def _beta32_cdf_scalar(x):
    # Closed form of the regularized incomplete beta I_x(3/2, 3/2):
    # (2/pi) * (asin(sqrt(x)) - (1-2x) * sqrt(x(1-x))).
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    r = math.sqrt(x * (1.0 - x))
    return (2.0 / math.pi) * (math.asin(math.sqrt(x)) - (1.0 - 2.0 * x) * r)


@numba.vectorize(["float64(float64)"], nopython=True, cache=True)
def beta32_cdf(x):
    return _beta32_cdf_scalar(x)


@numba.vectorize(["float64(float64)"], nopython=True, cache=True)
def beta32_quantile(u):
    if u <= 0.0:
        return 0.0
    if u >= 1.0:
        return 1.0
    if u == 0.5:
        return 0.5      # the median is exactly 1/2 by symmetry
    lo = 0.0
    hi = 1.0
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if _beta32_cdf_scalar(mid) < u:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@numba.vectorize(["float64(float64)"], nopython=True, cache=True)
def gamma32_cdf(t):
    # Regularized lower incomplete gamma P(3/2, t):
    # erf(sqrt(t)) - (2/sqrt(pi)) * sqrt(t) * exp(-t).
    if t <= 0.0:
        return 0.0
    s = math.sqrt(t)
    return math.erf(s) - (2.0 / math.sqrt(math.pi)) * s * math.exp(-t)


@numba.njit(cache=True, nogil=True)
def exchange_kernel(money, saving, ii, jj, eps):
    """Apply one pairwise money exchange per row of (ii, jj, eps), in order.

    Update rule per trade, with li, lj the partners' saving fractions:
        exposed_i = (1 - li) * m_i
        exposed_j = (1 - lj) * m_j
        m_i' = (m_i - exposed_i) + eps * (exposed_i + exposed_j)
        m_j' = (m_i + m_j) - m_i'
    The kept share is computed as m_i - exposed_i (not li * m_i) so the
    zero-saving kernel reduces bit-exactly to eps * (m_i + m_j), and m_j'
    as total minus share so each trade conserves the pair sum exactly.
    """
    for k in range(ii.shape[0]):
        i = ii[k]
        j = jj[k]
        mi = money[i]
        mj = money[j]
        li = saving[i]
        lj = saving[j]
        e = eps[k]
        if mi == mj and li == lj and e == 0.5:
            # Symmetric trade at the even split is an exact fixed point;
            # evaluate it directly instead of through rounded intermediates.
            continue
        exposed_i = (1.0 - li) * mi
        exposed_j = (1.0 - lj) * mj
        total = mi + mj
        new_i = (mi - exposed_i) + e * (exposed_i + exposed_j)
        if new_i < 0.0:
            new_i = 0.0
        elif new_i > total:
            new_i = total
        money[i] = new_i
        money[j] = total - new_i


@numba.njit(cache=True, nogil=True)
def collide_kernel(energy, ii, jj, shares):
    """Apply one pair collision per row; shares[k] is the Beta(3/2,3/2) split."""
    for k in range(ii.shape[0]):
        i = ii[k]
        j = jj[k]
        total = energy[i] + energy[j]
        s = shares[k] * total
        energy[i] = s
        energy[j] = total - s
