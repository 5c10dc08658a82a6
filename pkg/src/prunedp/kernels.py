"""Hot loops of the dynamic programs.

Every sweep fills ``out[t]`` for ``t = start+1 .. n`` from a "previous" row
``prev`` through

    out[t] = min_tau  prev[tau] + cost(tau, t) + beta

The penalised recursions pass the same array as ``prev`` and ``out`` (with
``F[0] = -beta``); the constrained recursions pass row ``k-1`` and row ``k`` of
the cost table with ``beta = 0``.  Candidates are visited so that ties go to
the smallest ``tau``.

All candidate values are computed as ``(prev[tau] + cost) + beta`` in every
sweep, so the exhaustive, inequality-pruned and functionally pruned variants
return bitwise identical rows whenever their candidate sets contain the
minimiser.
"""
import numpy as np

from ._jit import njit

EPS_LEN = 1e-12


@njit
def seg_cost(cs, css, inv2s2, t, s):
    d = cs[s] - cs[t]
    v = (css[s] - css[t] - d * d / (s - t)) * inv2s2
    if v < 0.0:
        v = 0.0
    return v


@njit
def full_sweep(cs, css, inv2s2, prev, out, argmin, beta, start):
    """Unpruned recursion over every ``tau`` in ``start .. t-1``."""
    n = cs.shape[0] - 1
    for t in range(start + 1, n + 1):
        best = np.inf
        arg = start
        for tau in range(start, t):
            v = prev[tau] + seg_cost(cs, css, inv2s2, tau, t) + beta
            if v < best:
                best = v
                arg = tau
        out[t] = best
        argmin[t] = arg


@njit
def inequality_sweep(cs, css, inv2s2, prev, out, argmin, beta, kappa, start,
                     trace, counts, ev_t, ev_tau):
    """Recursion restricted to the inequality-pruned candidate set.

    ``tau`` survives step ``t`` while ``prev[tau] + cost(tau, t) + kappa <=
    prev[t]``; the fresh candidate ``t`` always enters.  Returns the number of
    pruning events written to ``ev_t``/``ev_tau``.
    """
    n = cs.shape[0] - 1
    cand = np.empty(n + 1, dtype=np.int64)
    lhs = np.empty(n + 1, dtype=np.float64)
    cand[0] = start
    m = 1
    nev = 0
    for t in range(start + 1, n + 1):
        best = np.inf
        arg = start
        for i in range(m):
            tau = cand[i]
            x = prev[tau] + seg_cost(cs, css, inv2s2, tau, t)
            lhs[i] = x
            v = x + beta
            if v < best:
                best = v
                arg = tau
        out[t] = best
        argmin[t] = arg
        if trace:
            counts[t] = m
        bound = prev[t]
        keep = 0
        for i in range(m):
            if lhs[i] + kappa <= bound:
                cand[keep] = cand[i]
                keep += 1
            elif trace:
                ev_t[nev] = t
                ev_tau[nev] = cand[i]
                nev += 1
        cand[keep] = t
        m = keep + 1
    return nev


@njit
def functional_sweep(cs, css, inv2s2, prev, out, argmin, beta, start, dlo, dhi,
                     trace, counts, ev_t, ev_tau):
    """Recursion restricted to the functionally pruned candidate set.

    The validity sets are stored as one partition of ``[dlo, dhi]`` into
    cells ``[bound[i], bound[i+1]]`` owned by ``owner[i]``.  Within a cell
    owned by ``tau`` the new candidate can only win where ``tau`` itself rises
    above the insertion level, so each cell splits into at most three parts.
    Returns the number of pruning events.
    """
    n = cs.shape[0] - 1
    cap = 64
    bound = np.empty(cap + 1, dtype=np.float64)
    owner = np.empty(cap, dtype=np.int64)
    nbound = np.empty(cap + 1, dtype=np.float64)
    nowner = np.empty(cap, dtype=np.int64)
    bound[0] = dlo
    bound[1] = dhi
    owner[0] = start
    ncell = 1

    live = np.empty(n + 1, dtype=np.int64)
    nlive_arr = np.empty(n + 1, dtype=np.int64)
    live[0] = start
    nlive = 1
    cells_of = np.zeros(n + 1, dtype=np.int64)
    lhs = np.empty(n + 1, dtype=np.float64)
    ilo = np.empty(n + 1, dtype=np.float64)
    ihi = np.empty(n + 1, dtype=np.float64)
    nev = 0

    for t in range(start + 1, n + 1):
        best = np.inf
        arg = start
        for i in range(nlive):
            tau = live[i]
            x = prev[tau] + seg_cost(cs, css, inv2s2, tau, t)
            lhs[tau] = x
            v = x + beta
            if v < best or (v == best and tau < arg):
                best = v
                arg = tau
        out[t] = best
        argmin[t] = arg
        if trace:
            counts[t] = nlive

        # {mu : Cost^tau(mu) <= level} = centre +/- half-width
        level = prev[t]
        for i in range(nlive):
            tau = live[i]
            gap = level - lhs[tau]
            if gap < 0.0:
                ilo[tau] = np.inf
                ihi[tau] = -np.inf
            else:
                m = t - tau
                centre = (cs[t] - cs[tau]) / m
                half = np.sqrt(gap / (m * inv2s2))
                ilo[tau] = centre - half
                ihi[tau] = centre + half

        if 3 * ncell + 1 > nowner.shape[0]:
            newcap = 2 * (3 * ncell + 1)
            nbound = np.empty(newcap + 1, dtype=np.float64)
            nowner = np.empty(newcap, dtype=np.int64)

        k = 0
        for i in range(ncell):
            lo = bound[i]
            hi = bound[i + 1]
            tau = owner[i]
            a = max(lo, ilo[tau])
            b = min(hi, ihi[tau])
            if b - a < EPS_LEN:
                a = hi
                b = hi
            else:
                if a - lo < EPS_LEN:
                    a = lo
                if hi - b < EPS_LEN:
                    b = hi
            # [lo, a) -> t, [a, b] -> tau, (b, hi] -> t
            if a > lo:
                if k == 0 or nowner[k - 1] != t:
                    nbound[k] = lo
                    nowner[k] = t
                    k += 1
            if b > a:
                if k == 0 or nowner[k - 1] != tau:
                    nbound[k] = a
                    nowner[k] = tau
                    k += 1
            if hi > b:
                if k == 0 or nowner[k - 1] != t:
                    nbound[k] = b
                    nowner[k] = t
                    k += 1
        nbound[k] = dhi

        for i in range(nlive):
            cells_of[live[i]] = 0
        cells_of[t] = 0
        for i in range(k):
            cells_of[nowner[i]] += 1

        nl = 0
        for i in range(nlive):
            tau = live[i]
            if cells_of[tau] > 0:
                nlive_arr[nl] = tau
                nl += 1
            elif trace:
                ev_t[nev] = t
                ev_tau[nev] = tau
                nev += 1
        if cells_of[t] > 0:
            nlive_arr[nl] = t
            nl += 1
        elif trace:
            ev_t[nev] = t
            ev_tau[nev] = t
            nev += 1

        live, nlive_arr = nlive_arr, live
        nlive = nl
        bound, nbound = nbound, bound
        owner, nowner = nowner, owner
        ncell = k
        if nbound.shape[0] < bound.shape[0]:
            nbound = np.empty(bound.shape[0], dtype=np.float64)
            nowner = np.empty(owner.shape[0], dtype=np.int64)
    return nev


@njit
def best_split(cs, css, inv2s2, t, s):
    """Largest cost reduction from splitting ``y[t+1 .. s]`` in two."""
    whole = seg_cost(cs, css, inv2s2, t, s)
    best = -np.inf
    arg = -1
    for j in range(t + 1, s):
        gain = whole - seg_cost(cs, css, inv2s2, t, j) - seg_cost(cs, css, inv2s2, j, s)
        if gain > best:
            best = gain
            arg = j
    return best, arg


@njit
def backtrack(argmin):
    """Changepoints of the penalised solution from the last-change pointers."""
    n = argmin.shape[0] - 1
    out = np.empty(n, dtype=np.int64)
    k = 0
    t = n
    while t > 0:
        tau = argmin[t]
        if tau <= 0:
            break
        out[k] = tau
        k += 1
        t = tau
    return out[:k][::-1].copy()
