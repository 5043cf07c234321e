"""Dense two-phase tableau simplex with Bland's rule.

Built for the small pooling/witness LPs (tens of variables, at most a few
hundred constraints): deterministic, anti-cycling, no per-call modelling
overhead.  The pivot kernel is numba-compiled when numba is importable and
falls back to the same code interpreted otherwise.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


_TOL = 1e-9

_OPTIMAL, _UNBOUNDED, _INFEASIBLE = 0, 1, 2


@njit(cache=True)
def _pivot(tab, basis, leave, enter):
    rows, cols = tab.shape
    piv = tab[leave, enter]
    for j in range(cols):
        tab[leave, j] /= piv
    for i in range(rows):
        if i != leave:
            f = tab[i, enter]
            if f != 0.0:
                for j in range(cols):
                    tab[i, j] -= f * tab[leave, j]
    basis[leave] = enter


@njit(cache=True)
def _run(tab, basis, allowed):
    """Bland: first column with a negative reduced cost enters; the
    lowest-index basic variable leaves on ratio ties."""
    m = tab.shape[0] - 1
    while True:
        enter = -1
        for j in range(allowed):
            if tab[m, j] < -_TOL:
                enter = j
                break
        if enter < 0:
            return _OPTIMAL
        best = np.inf
        leave = -1
        for i in range(m):
            if tab[i, enter] > _TOL:
                r = tab[i, -1] / tab[i, enter]
                if leave < 0 or r < best - _TOL:
                    best = r
                    leave = i
                elif r <= best + _TOL and basis[i] < basis[leave]:
                    leave = i
        if leave < 0:
            return _UNBOUNDED
        _pivot(tab, basis, leave, enter)


@njit(cache=True)
def _set_objective(tab, basis, cost):
    m = tab.shape[0] - 1
    cols = tab.shape[1]
    for j in range(cols):
        tab[m, j] = 0.0
    for j in range(cols - 1):
        tab[m, j] = cost[j]
    for i in range(m):
        cb = cost[basis[i]]
        if cb != 0.0:
            for j in range(cols):
                tab[m, j] -= cb * tab[i, j]


@njit(cache=True)
def _solve_core(tab, basis, cost, first_art, n_art):
    m = tab.shape[0] - 1
    width = tab.shape[1] - 1
    if n_art > 0:
        phase1 = np.zeros(width)
        for j in range(first_art, width):
            phase1[j] = 1.0
        _set_objective(tab, basis, phase1)
        if _run(tab, basis, width) != _OPTIMAL:
            return _INFEASIBLE
        if -tab[m, -1] > 1e-8:
            return _INFEASIBLE
        # drive zero-level artificials out of the basis where possible
        for i in range(m):
            if basis[i] >= first_art:
                jpick = -1
                for j in range(first_art):
                    if abs(tab[i, j]) > _TOL:
                        jpick = j
                        break
                if jpick >= 0:
                    _pivot(tab, basis, i, jpick)
    _set_objective(tab, basis, cost)
    return _run(tab, basis, first_art)


def dense_simplex(c, a, senses, b, maximize=False):
    """Solve min/max c.x s.t. a x (<=|==|>=) b, x >= 0.

    Returns (status, x, objective) with status in
    {"optimal", "infeasible", "unbounded"}.
    """
    c = np.asarray(c, dtype=float).copy()
    a = np.asarray(a, dtype=float).copy()
    b = np.asarray(b, dtype=float).copy()
    if a.ndim == 1:
        a = a.reshape(1, -1)
    m, n = a.shape
    if maximize:
        c = -c

    senses = list(senses)
    for i in range(m):
        if b[i] < 0:
            a[i] = -a[i]
            b[i] = -b[i]
            senses[i] = {"<=": ">=", ">=": "<=", "==": "=="}[senses[i]]

    n_slack = sum(1 for s in senses if s == "<=")
    n_surp = sum(1 for s in senses if s == ">=")
    n_art = sum(1 for s in senses if s in (">=", "=="))
    width = n + n_slack + n_surp + n_art
    first_art = n + n_slack + n_surp

    tab = np.zeros((m + 1, width + 1))
    tab[:m, :n] = a
    tab[:m, -1] = b
    basis = np.empty(m, dtype=np.int64)
    i_slack, i_surp, i_art = n, n + n_slack, first_art
    for i, s in enumerate(senses):
        if s == "<=":
            tab[i, i_slack] = 1.0
            basis[i] = i_slack
            i_slack += 1
        elif s == ">=":
            tab[i, i_surp] = -1.0
            i_surp += 1
            tab[i, i_art] = 1.0
            basis[i] = i_art
            i_art += 1
        else:
            tab[i, i_art] = 1.0
            basis[i] = i_art
            i_art += 1

    cost = np.zeros(width)
    cost[:n] = c
    status = _solve_core(tab, basis, cost, first_art, n_art)
    if status == _INFEASIBLE:
        return "infeasible", None, None
    if status == _UNBOUNDED:
        return "unbounded", None, None
    x = np.zeros(n)
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = tab[i, -1]
    obj = float(c @ x)
    if maximize:
        obj = -obj
    return "optimal", x, obj
