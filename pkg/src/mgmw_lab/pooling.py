"""Candidate max-weight subsets and multiuser local-pooling bounds.

For a candidate subset L of links, two matrices drive everything: M, whose
columns are all rate allocation vectors over the subset's edges, and
M-tilde, whose columns are the vectors the greedy scheduler can actually
produce while L holds the maximum weight.  The lower bound tau is the
optimum of a small LP over row-collapsed variants of these matrices (each
multiuser link contributes one combined row weighted by its fixed rates);
the upper bound is the smallest sigma admitting convex combinations
mu, nu with sigma*mu >= nu componentwise.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from pathlib import Path

import numpy as np
from scipy.optimize import linprog

from . import capacity as cap
from .errors import RegionNotFixed, TooLargeForExact
from .net_model import Link, NetworkGraph, enumerate_links
from .simplex import dense_simplex
from .rate_alloc import (
    DEFAULT_BOUNDARY_SAMPLES,
    enumerate_mgmw_reachable,
    enumerate_rate_vectors,
)

WITNESS_MARGIN = 1e-6
_PARALLEL_THRESHOLD = 4000


# ---------------------------------------------------------------------------
# Generic LP carrier
# ---------------------------------------------------------------------------


@dataclass
class LpProblem:
    """min/max c.x subject to a x (<=|==|>=) b, with per-variable bounds."""

    c: np.ndarray
    a: np.ndarray
    senses: tuple[str, ...]
    b: np.ndarray
    maximize: bool = False
    bounds: tuple[tuple[float | None, float | None], ...] | None = None


@dataclass
class LpSolution:
    status: str  # optimal | infeasible | unbounded
    x: np.ndarray | None
    objective: float | None


_STATUS = {0: "optimal", 1: "iteration_limit", 2: "infeasible", 3: "unbounded", 4: "numerical"}


def solve_lp(problem: LpProblem, method: str = "bland") -> LpSolution:
    """Solve a dense LP exactly (within 1e-8 tolerances), deterministically.

    The default route is the in-package dense simplex with Bland's rule;
    ``method='highs'`` delegates to scipy (also used automatically when the
    problem carries custom variable bounds).  Infeasible and unbounded
    outcomes are reported in the status, never raised.
    """
    c = np.asarray(problem.c, dtype=float)
    a = np.asarray(problem.a, dtype=float)
    b = np.asarray(problem.b, dtype=float)
    if not (np.all(np.isfinite(c)) and np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("LP coefficients must be finite")
    if method == "bland" and problem.bounds is None:
        status, x, obj = dense_simplex(c, a, problem.senses, b, maximize=problem.maximize)
        if status != "optimal":
            return LpSolution(status=status, x=None, objective=None)
        return LpSolution(status="optimal", x=x, objective=obj)
    senses = problem.senses
    ub_rows = [i for i, s in enumerate(senses) if s == "<="]
    ge_rows = [i for i, s in enumerate(senses) if s == ">="]
    eq_rows = [i for i, s in enumerate(senses) if s == "=="]
    a_ub = b_ub = a_eq = b_eq = None
    if ub_rows or ge_rows:
        a_ub = np.vstack([a[ub_rows]] + ([-a[ge_rows]] if ge_rows else []))
        b_ub = np.concatenate([b[ub_rows], -b[ge_rows]] if ge_rows else [b[ub_rows]])
    if eq_rows:
        a_eq, b_eq = a[eq_rows], b[eq_rows]
    bounds = problem.bounds if problem.bounds is not None else [(0, None)] * len(c)
    res = linprog(
        -c if problem.maximize else c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=list(bounds),
        method="highs",
        options={
            "primal_feasibility_tolerance": 1e-9,
            "dual_feasibility_tolerance": 1e-9,
        },
    )
    status = _STATUS.get(res.status, "numerical")
    if status != "optimal":
        return LpSolution(status=status, x=None, objective=None)
    obj = -res.fun if problem.maximize else res.fun
    return LpSolution(status="optimal", x=np.asarray(res.x), objective=float(obj))


# ---------------------------------------------------------------------------
# Candidate MW subsets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CandidateMWSet:
    """A subset of links able to hold the maximum weight simultaneously."""

    links: tuple[Link, ...]
    edges: tuple[int, ...]
    witness_queues: tuple[float, ...] | None = None

    def label(self) -> str:
        return "{" + ",".join(lk.label() for lk in self.links) + "}"


def _structural_ok(mask: int, pair_bits: list[tuple[int, int, int]], mode: str) -> bool:
    for kb, lb, pb in pair_bits:
        if mode == "fixed":
            if mask & kb and mask & lb:
                return False
        else:
            count = bool(mask & kb) + bool(mask & lb) + bool(mask & pb)
            if count > 1:
                return False
    return True


@lru_cache(maxsize=64)
def _witness_matrix(graph: NetworkGraph) -> np.ndarray:
    """Weight rows (one per link, trailing -W column) plus the mass row."""
    links = enumerate_links(graph)
    e = graph.edge_count
    a = np.zeros((len(links) + 1, e + 1))
    for i, lk in enumerate(links):
        if lk.is_multiuser:
            k, l = lk.edges
            region = graph.region(k, l)
            a[i, k], a[i, l] = region.c_kl, region.c_lk
        else:
            j = lk.edges[0]
            a[i, j] = graph.p2p_rate[j]
        a[i, e] = -1.0
    a[len(links), :e] = 1.0
    return a


def _witness_lp(graph: NetworkGraph, links: list[Link], subset: tuple[Link, ...]):
    """Queue lengths giving every subset link the strict maximum weight.

    Feasibility LP over (q, W): subset weights equal W, all other link
    weights at most W - margin, total queue mass 1.
    """
    e = graph.edge_count
    chosen = set(subset)
    a = _witness_matrix(graph)
    senses = tuple(
        "==" if lk in chosen else "<=" for lk in links
    ) + ("==",)
    rhs = np.array(
        [0.0 if lk in chosen else -WITNESS_MARGIN for lk in links] + [1.0]
    )
    sol = solve_lp(LpProblem(c=np.zeros(e + 1), a=a, senses=senses, b=rhs))
    if sol.status != "optimal":
        return None
    return tuple(float(v) for v in sol.x[:e])


def candidate_mw_subsets(
    graph: NetworkGraph, mode: str = "fixed", verify_witness: bool = False
) -> list[CandidateMWSet]:
    """All nonempty link subsets passing the structural candidate filter.

    Fixed mode forbids both edges of a multiuser pair appearing as separate
    point-to-point links; variable mode allows at most one of the three
    links {(k,l), k, l} per pair.  With ``verify_witness`` (fixed mode) each
    set must additionally admit queue lengths realising the joint maximum,
    found by LP; the witness is stored on the set.
    """
    if mode not in ("fixed", "variable"):
        raise ValueError(f"unknown mode {mode!r}")
    links = enumerate_links(graph)
    n = len(links)
    if n > 24:
        raise TooLargeForExact(f"{n} links exceed the candidate-enumeration guard")
    pos = {lk: i for i, lk in enumerate(links)}
    pair_bits = []
    for k, l in graph.multiuser_pairs:
        pair_bits.append(
            (1 << pos[Link.p2p(k)], 1 << pos[Link.p2p(l)], 1 << pos[Link.multiuser(k, l)])
        )
    out = []
    for mask in range(1, 1 << n):
        if not _structural_ok(mask, pair_bits, mode):
            continue
        subset = tuple(links[i] for i in range(n) if mask >> i & 1)
        witness = None
        if verify_witness and mode == "fixed":
            if not graph.all_fixed():
                raise RegionNotFixed("witness verification needs fixed regions")
            witness = _witness_lp(graph, links, subset)
            if witness is None:
                continue
        edges = tuple(sorted({e for lk in subset for e in lk.edges}))
        out.append(CandidateMWSet(links=subset, edges=edges, witness_queues=witness))
    return out


# ---------------------------------------------------------------------------
# Pooling matrices for one candidate set
# ---------------------------------------------------------------------------


@dataclass
class PoolingMatrices:
    """M / M-tilde over the subset's edges plus their row-collapsed forms."""

    edges: tuple[int, ...]
    m: np.ndarray  # |E'| x |R|
    m_tilde: np.ndarray  # |E'| x |R~|
    m0: np.ndarray  # support x |R|
    m_tilde0: np.ndarray  # support x |R~|
    support: tuple[tuple, ...]  # ("p2p", j) or ("pair", (k, l), designated_edge)


@lru_cache(maxsize=4096)
def _rate_vectors_cached(graph: NetworkGraph, edges: tuple[int, ...], mode: str, n: int):
    return tuple(enumerate_rate_vectors(graph, edges, mode=mode, n_samples=n))


def _pair_roles(cand: CandidateMWSet) -> list[tuple[tuple[int, int], int, int]]:
    """(pair, role_k, designated_l) per multiuser link in the set.

    role_k is the edge that can be present as a point-to-point link in the
    set; the collapsed matrix row sits at the other edge.
    """
    p2p_edges = {lk.edges[0] for lk in cand.links if not lk.is_multiuser}
    roles = []
    for lk in cand.links:
        if not lk.is_multiuser:
            continue
        k, l = lk.edges
        if l in p2p_edges and k not in p2p_edges:
            k, l = l, k
        roles.append(((lk.edges[0], lk.edges[1]), k, l))
    return roles


def _collapse(graph, cand, edges, mat) -> tuple[np.ndarray, tuple[tuple, ...]]:
    idx = {e: i for i, e in enumerate(edges)}
    rows = []
    support: list[tuple] = []
    for lk in cand.links:
        if lk.is_multiuser:
            continue
        j = lk.edges[0]
        rows.append(mat[idx[j]])
        support.append(("p2p", j))
    for pair, k, l in _pair_roles(cand):
        region = graph.region(*pair)
        c_kl = region.c_kl if pair[0] == k else region.c_lk
        c_lk = region.c_lk if pair[0] == k else region.c_kl
        rows.append(c_kl * mat[idx[k]] + c_lk * mat[idx[l]])
        support.append(("pair", pair, l))
    return np.array(rows), tuple(support)


def _pool_matrices(graph: NetworkGraph, cand: CandidateMWSet) -> PoolingMatrices:
    edges = cand.edges
    vectors = _rate_vectors_cached(graph, edges, "fixed", 0)
    tilde = enumerate_mgmw_reachable(graph, list(cand.links))
    m = np.array([v.rates for v in vectors], dtype=float).T
    mt = np.array([v.rates for v in tilde], dtype=float).T
    m0, support = _collapse(graph, cand, edges, m)
    mt0, _ = _collapse(graph, cand, edges, mt)
    return PoolingMatrices(edges=edges, m=m, m_tilde=mt, m0=m0, m_tilde0=mt0, support=support)


def _as_candidate(graph: NetworkGraph, lmw) -> CandidateMWSet:
    if isinstance(lmw, CandidateMWSet):
        return lmw
    links = tuple(sorted(set(lmw), key=Link.sort_key))
    edges = tuple(sorted({e for lk in links for e in lk.edges}))
    return CandidateMWSet(links=links, edges=edges)


# ---------------------------------------------------------------------------
# Sigma bounds
# ---------------------------------------------------------------------------


def _maximal_columns(cols: np.ndarray) -> np.ndarray:
    """Indices of componentwise-maximal columns (duplicates keep the first)."""
    n = cols.shape[1]
    if n <= 1:
        return np.arange(n)
    ge = (cols[:, :, None] >= cols[:, None, :]).all(axis=0)  # ge[i, j]: col_i >= col_j
    eq = ge & ge.T
    keep = np.ones(n, dtype=bool)
    for j in range(n):
        dominators = ge[:, j] & ~eq[:, j]
        dup_earlier = eq[:, j].copy()
        dup_earlier[j:] = False
        if dominators.any() or dup_earlier.any():
            keep[j] = False
    return np.flatnonzero(keep)


def _minimal_columns(cols: np.ndarray) -> np.ndarray:
    return _maximal_columns(-cols)


@dataclass
class SigmaLowerResult:
    tau: float
    x: np.ndarray  # over support rows
    matrices: PoolingMatrices


@dataclass
class SigmaUpperResult:
    sigma: float
    mu: np.ndarray
    nu: np.ndarray
    gamma: np.ndarray
    beta: np.ndarray
    matrices: PoolingMatrices


def sigma_lower_lp(graph: NetworkGraph, lmw, matrices: PoolingMatrices | None = None) -> SigmaLowerResult:
    """Largest sigma for which the subset provably satisfies local pooling.

    LP: max tau subject to x'M0 <= 1, x'Mt0 >= tau, x >= 0, with x supported
    on the point-to-point links' edges and each pair's designated row.
    """
    cand = _as_candidate(graph, lmw)
    pm = matrices if matrices is not None else _pool_matrices(graph, cand)
    ns = pm.m0.shape[0]
    # dominated columns give implied constraints; drop them for speed
    m0 = pm.m0[:, _maximal_columns(pm.m0)]
    mt0 = pm.m_tilde0[:, _minimal_columns(pm.m_tilde0)]
    # variables: x (ns), tau
    rows, senses, rhs = [], [], []
    for j in range(m0.shape[1]):
        rows.append(np.concatenate([m0[:, j], [0.0]]))
        senses.append("<=")
        rhs.append(1.0)
    for j in range(mt0.shape[1]):
        rows.append(np.concatenate([mt0[:, j], [-1.0]]))
        senses.append(">=")
        rhs.append(0.0)
    c = np.zeros(ns + 1)
    c[ns] = 1.0
    sol = solve_lp(
        LpProblem(c=c, a=np.array(rows), senses=tuple(senses), b=np.array(rhs), maximize=True)
    )
    if sol.status != "optimal":
        raise RuntimeError(f"lower-bound LP ended {sol.status}; this is a modelling bug")
    return SigmaLowerResult(tau=float(sol.objective), x=sol.x[:ns], matrices=pm)


def sigma_ratio_bound(graph: NetworkGraph, lmw, matrices: PoolingMatrices | None = None) -> float:
    """Closed-form lower bound: all-ones dual vector, normalised.

    Equals min over reachable columns of the collapsed column sum divided
    by the max over all columns, hence never exceeds the LP optimum.
    """
    cand = _as_candidate(graph, lmw)
    pm = matrices if matrices is not None else _pool_matrices(graph, cand)
    num = float(np.min(pm.m_tilde0.sum(axis=0)))
    den = float(np.max(pm.m0.sum(axis=0)))
    return num / den


def sigma_upper_lp(graph: NetworkGraph, lmw, matrices: PoolingMatrices | None = None) -> SigmaUpperResult:
    """Smallest sigma admitting sigma*mu >= nu for this subset.

    Linearised with gamma = sigma*alpha: minimise sum(gamma) subject to
    M gamma >= Mt beta componentwise, sum(beta) = 1.
    """
    cand = _as_candidate(graph, lmw)
    pm = matrices if matrices is not None else _pool_matrices(graph, cand)
    sigma, gamma, beta = _upper_lp_core(pm.m, pm.m_tilde)
    nu = pm.m_tilde @ beta
    mu = pm.m @ gamma / sigma if sigma > 0 else pm.m @ gamma
    return SigmaUpperResult(sigma=sigma, mu=mu, nu=nu, gamma=gamma, beta=beta, matrices=pm)


def _upper_lp_core(m: np.ndarray, mt: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """min sum(gamma) with m gamma >= mt beta, sum(beta)=1; full-length witnesses.

    Dominated generator columns of m and dominating columns of mt cannot
    help the optimum and are dropped before solving.
    """
    keep_m = _maximal_columns(m)
    keep_t = _minimal_columns(mt)
    ms, mts = m[:, keep_m], mt[:, keep_t]
    ne, n_r = ms.shape
    n_t = mts.shape[1]
    rows, senses, rhs = [], [], []
    for i in range(ne):
        rows.append(np.concatenate([ms[i], -mts[i]]))
        senses.append(">=")
        rhs.append(0.0)
    rows.append(np.concatenate([np.zeros(n_r), np.ones(n_t)]))
    senses.append("==")
    rhs.append(1.0)
    c = np.concatenate([np.ones(n_r), np.zeros(n_t)])
    sol = solve_lp(LpProblem(c=c, a=np.array(rows), senses=tuple(senses), b=np.array(rhs)))
    if sol.status != "optimal":
        raise RuntimeError(f"upper-bound LP ended {sol.status}; this is a modelling bug")
    gamma = np.zeros(m.shape[1])
    beta = np.zeros(mt.shape[1])
    gamma[keep_m] = sol.x[:n_r]
    beta[keep_t] = sol.x[n_r:]
    return float(sol.objective), gamma, beta


@dataclass
class GraphSigmaBounds:
    sigma_l: float
    sigma_u: float
    table: list[dict]
    sigma_l_set: str = ""
    sigma_u_set: str = ""


def _bounds_row(graph: NetworkGraph, cand: CandidateMWSet) -> dict:
    pm = _pool_matrices(graph, cand)
    lower = sigma_lower_lp(graph, cand, pm)
    ratio = sigma_ratio_bound(graph, cand, pm)
    upper = sigma_upper_lp(graph, cand, pm)
    return {
        "links": cand.label(),
        "tau_lower": lower.tau,
        "ratio_bound": ratio,
        "sigma_upper": upper.sigma,
    }


def _bounds_chunk(args) -> list[dict]:
    graph, link_tuples = args
    rows = []
    for links in link_tuples:
        cand = _as_candidate(graph, [Link(t) for t in links])
        rows.append(_bounds_row(graph, cand))
    return rows


def graph_sigma_bounds(
    graph: NetworkGraph,
    mode: str = "fixed",
    verify_witness: bool = True,
    n_jobs: int | None = None,
) -> GraphSigmaBounds:
    """Graph-wide pooling bounds: minima of tau and sigma over candidate sets.

    With ``verify_witness`` (the default) only sets that some queue state
    can realise count toward the minima; the witness LPs are run lazily in
    ascending bound order, which gives the same minima as verifying every
    set eagerly.  Independent per-set jobs fan out to a process pool on
    large graphs.
    """
    sets = candidate_mw_subsets(graph, mode=mode, verify_witness=False)
    if not sets:
        raise ValueError("graph has no candidate subsets")
    by_label = {c.label(): c for c in sets}
    jobs = (os.cpu_count() or 1) if n_jobs is None else n_jobs
    if len(sets) >= _PARALLEL_THRESHOLD and jobs > 1:
        chunks = [sets[i::jobs] for i in range(jobs)]
        payload = [
            (graph, [tuple(lk.edges for lk in c.links) for c in chunk]) for chunk in chunks
        ]
        rows: list[dict] = []
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_bounds_chunk, payload):
                rows.extend(part)
        rows.sort(key=lambda r: r["links"])
    else:
        rows = [_bounds_row(graph, c) for c in sets]
        rows.sort(key=lambda r: r["links"])

    links = enumerate_links(graph)
    realizable: dict[str, bool] = {}

    def feasible(label: str) -> bool:
        if not verify_witness or mode != "fixed":
            return True
        if label not in realizable:
            realizable[label] = _witness_lp(graph, links, by_label[label].links) is not None
        return realizable[label]

    def lazy_min(key: str) -> tuple[float, str]:
        for row in sorted(rows, key=lambda r: (r[key], r["links"])):
            if feasible(row["links"]):
                return row[key], row["links"]
        raise ValueError("no realizable candidate subset")

    sigma_l, set_l = lazy_min("tau_lower")
    sigma_u, set_u = lazy_min("sigma_upper")
    return GraphSigmaBounds(
        sigma_l=sigma_l, sigma_u=sigma_u, table=rows, sigma_l_set=set_l, sigma_u_set=set_u
    )


# ---------------------------------------------------------------------------
# Variable-rate grid estimate
# ---------------------------------------------------------------------------


def _interior_samples(region, n: int) -> list[tuple[float, float]]:
    pts = cap.sample_boundary(region, n)
    return [(p.r_k, p.r_l) for p in pts if p.r_k > 0.0 and p.r_l > 0.0]


def vr_sigma_hat(
    graph: NetworkGraph, n_samples: int = DEFAULT_BOUNDARY_SAMPLES, return_table: bool = False
):
    """Grid upper-bound estimate for the variable-rate pooling factor.

    Runs the upper-bound LP for every variable-mode candidate subset and
    every grid assignment of interior boundary points to its multiuser
    links; the estimate is the minimum and is nonincreasing as the (nested)
    grid grows.
    """
    sets = candidate_mw_subsets(graph, mode="variable", verify_witness=False)
    best = 1.0
    table = []
    for cand in sets:
        edges = cand.edges
        vectors = _rate_vectors_cached(graph, edges, "with_region_corners", n_samples)
        m = np.array([v.rates for v in vectors], dtype=float).T
        pairs_in = [lk.edges for lk in cand.links if lk.is_multiuser]
        other_pairs = [
            (k, l)
            for k, l in graph.multiuser_pairs
            if k in set(edges) and l in set(edges) and (k, l) not in pairs_in
        ]
        completion = {p: _interior_samples(graph.region(*p), n_samples) for p in other_pairs}
        grids = [_interior_samples(graph.region(*p), n_samples) for p in pairs_in]
        set_best = None
        for assignment in product(*grids):
            pair_rates = dict(zip(pairs_in, assignment))
            tilde = enumerate_mgmw_reachable(
                graph, list(cand.links), pair_rates=pair_rates, completion_rates=completion
            )
            mt = np.array([v.rates for v in tilde], dtype=float).T
            sigma, _, _ = _upper_lp_core(m, mt)
            if set_best is None or sigma < set_best:
                set_best = sigma
        if set_best is not None:
            best = min(best, set_best)
            table.append({"links": cand.label(), "sigma_upper": set_best})
    if return_table:
        return best, table
    return best


# ---------------------------------------------------------------------------
# Report output
# ---------------------------------------------------------------------------


def pooling_report_to_csv(
    bounds: GraphSigmaBounds, path: str | Path, witness_dir: str | Path | None = None
) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(
            ["set_id", "links", "tau_lower", "ratio_bound", "sigma_upper", "witness_file"]
        )
        for i, row in enumerate(bounds.table):
            writer.writerow(
                [
                    i,
                    row["links"],
                    f"{row['tau_lower']:.9f}",
                    f"{row['ratio_bound']:.9f}",
                    f"{row['sigma_upper']:.9f}",
                    row.get("witness_file", ""),
                ]
            )


def write_witness_file(path: str | Path, lower: SigmaLowerResult, upper: SigmaUpperResult) -> None:
    doc = {
        "tau": lower.tau,
        "x": [float(v) for v in lower.x],
        "support": [list(map(str, s)) for s in lower.matrices.support],
        "sigma": upper.sigma,
        "mu": [float(v) for v in upper.mu],
        "nu": [float(v) for v in upper.nu],
        "gamma": [float(v) for v in upper.gamma],
        "beta": [float(v) for v in upper.beta],
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")
