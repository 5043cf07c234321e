"""Feasible rate-allocation vectors, conflict logic, and reachable sets.

A rate allocation vector assigns a service rate to every edge of a subset
E' subject to three constraints: main-interference exclusion, multiuser
pairing (two secondary-paired edges are co-active only at a boundary rate
pair of their region, which silences the rest of both secondary sets), and
maximality (no silent edge could have been activated).

Enumeration is exact and exponential in the number of links; a guard
rejects graphs with more than MAX_EXACT_LINKS links.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from . import capacity as cap
from .errors import RegionNotFixed, TooLargeForExact
from .net_model import Link, NetworkGraph, enumerate_links

MAX_EXACT_LINKS = 24
DEFAULT_BOUNDARY_SAMPLES = 33


@dataclass(frozen=True)
class RateAllocationVector:
    """Rates over a sorted edge subset plus the links realising them."""

    edges: tuple[int, ...]
    rates: tuple[float, ...]
    active_links: tuple[tuple[Link, tuple[float, ...]], ...]

    def rate_of(self, edge: int) -> float:
        return self.rates[self.edges.index(edge)]


# ---------------------------------------------------------------------------
# Conflict relation over links
# ---------------------------------------------------------------------------


def link_conflict(graph: NetworkGraph, a: Link, b: Link) -> bool:
    """True iff links a and b can never be scheduled together.

    Links sharing an edge conflict outright; otherwise a conflicts with b
    when any edge of b lies in the union of the main and secondary sets of
    a's edges (minus a's own edges, so a multiuser link does not conflict
    with itself through its internal pairing).
    """
    if a == b:
        return False
    ea, eb = set(a.edges), set(b.edges)
    if ea & eb:
        return True
    removal = set()
    for e in a.edges:
        removal |= graph.main_ifs[e] | graph.secondary_ifs[e]
    removal -= ea
    return bool(removal & eb)


def conflict_masks(graph: NetworkGraph, links: list[Link]) -> list[int]:
    """Bitmask per link of the links it conflicts with."""
    n = len(links)
    masks = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if link_conflict(graph, links[i], links[j]):
                masks[i] |= 1 << j
                masks[j] |= 1 << i
    return masks


def _maximal_independent_sets(n: int, masks: list[int], restrict: int | None = None) -> list[int]:
    """All maximal independent sets (as bitmasks) of the conflict graph.

    Bron-Kerbosch with pivoting on the complement graph, restricted to the
    vertices in ``restrict`` when given.  Deterministic output order.
    """
    full = (1 << n) - 1 if restrict is None else restrict
    comp = [(~masks[i]) & full & ~(1 << i) for i in range(n)]
    out: list[int] = []

    def bk(r: int, p: int, x: int) -> None:
        if p == 0 and x == 0:
            out.append(r)
            return
        # pivot: vertex of p|x with most neighbours in p
        px = p | x
        pivot, best = -1, -1
        m = px
        while m:
            v = (m & -m).bit_length() - 1
            m &= m - 1
            cnt = bin(p & comp[v]).count("1")
            if cnt > best:
                best, pivot = cnt, v
        cand = p & ~comp[pivot]
        while cand:
            v = (cand & -cand).bit_length() - 1
            cand &= cand - 1
            vbit = 1 << v
            bk(r | vbit, p & comp[v], x & comp[v])
            p &= ~vbit
            x |= vbit

    if full:
        bk(0, full, 0)
    else:
        out.append(0)
    return sorted(out)


# ---------------------------------------------------------------------------
# Link universe over an edge subset
# ---------------------------------------------------------------------------


def _pair_instantiations(
    graph: NetworkGraph, pair: tuple[int, int], mode: str, n_samples: int
) -> list[tuple[float, float]]:
    region = graph.region(*pair)
    if mode == "fixed":
        if not isinstance(region, cap.FixedRegion):
            raise RegionNotFixed(
                f"region for pair ({pair[0] + 1},{pair[1] + 1}) is not a fixed rate point"
            )
        return [(region.c_kl, region.c_lk)]
    if mode == "with_region_corners":
        pts = cap.sample_boundary(region, n_samples)
        # corners coincide with the point-to-point configurations
        return [(p.r_k, p.r_l) for p in pts if p.r_k > 0.0 and p.r_l > 0.0]
    raise ValueError(f"unknown mode {mode!r}")


def _universe(graph: NetworkGraph, edge_subset: tuple[int, ...]) -> list[Link]:
    edges = set(edge_subset)
    links = [Link.p2p(j) for j in sorted(edges)]
    links += [
        Link.multiuser(k, l) for k, l in graph.multiuser_pairs if k in edges and l in edges
    ]
    links.sort(key=Link.sort_key)
    if len(links) > MAX_EXACT_LINKS:
        raise TooLargeForExact(f"{len(links)} links exceed the exact-enumeration guard")
    return links


@lru_cache(maxsize=8192)
def _universe_cached(
    graph: NetworkGraph, edge_subset: tuple[int, ...]
) -> tuple[tuple[Link, ...], tuple[int, ...]]:
    links = _universe(graph, edge_subset)
    return tuple(links), tuple(conflict_masks(graph, links))


def _vectors_from_link_sets(
    graph: NetworkGraph,
    edge_subset: tuple[int, ...],
    links: list[Link],
    link_sets: list[int],
    pair_options: dict[tuple[int, int], list[tuple[float, float]]],
) -> list[RateAllocationVector]:
    """Expand structural link sets into rate vectors (one per pair-rate choice)."""
    index = {e: i for i, e in enumerate(edge_subset)}
    out: dict[tuple[float, ...], RateAllocationVector] = {}
    for mask in link_sets:
        members = [links[i] for i in range(len(links)) if mask >> i & 1]
        # product over rate options of included multiuser links
        choices: list[list[tuple[Link, tuple[float, ...]]]] = [[]]
        for lk in members:
            if lk.is_multiuser:
                opts = pair_options[lk.edges]
                choices = [c + [(lk, tuple(o))] for c in choices for o in opts]
            else:
                j = lk.edges[0]
                choices = [c + [(lk, (graph.p2p_rate[j],))] for c in choices]
        for combo in choices:
            rates = [0.0] * len(edge_subset)
            for lk, rs in combo:
                for e, r in zip(lk.edges, rs):
                    rates[index[e]] = r
            key = tuple(rates)
            if key not in out:
                out[key] = RateAllocationVector(
                    edges=edge_subset,
                    rates=key,
                    active_links=tuple(sorted(combo, key=lambda t: t[0].sort_key())),
                )
    return [out[k] for k in sorted(out)]


def enumerate_rate_vectors(
    graph: NetworkGraph,
    edge_subset=None,
    mode: str = "fixed",
    n_samples: int = DEFAULT_BOUNDARY_SAMPLES,
) -> list[RateAllocationVector]:
    """The set of all maximal feasible rate allocation vectors over E'.

    ``mode='fixed'`` instantiates every multiuser link at its fixed pair and
    requires Fixed regions; ``mode='with_region_corners'`` instantiates each
    multiuser link at every sampled interior boundary point (corners reduce
    to the point-to-point links and are covered by those).
    """
    if edge_subset is None:
        edge_subset = tuple(range(graph.edge_count))
    edge_subset = tuple(sorted(edge_subset))
    links = _universe(graph, edge_subset)
    pair_options = {
        lk.edges: _pair_instantiations(graph, lk.edges, mode, n_samples)
        for lk in links
        if lk.is_multiuser
    }
    masks = conflict_masks(graph, links)
    sets = _maximal_independent_sets(len(links), masks)
    return _vectors_from_link_sets(graph, edge_subset, links, sets, pair_options)


# ---------------------------------------------------------------------------
# Constraint checkers (independent of the enumeration path)
# ---------------------------------------------------------------------------


def check_constraints(
    graph: NetworkGraph,
    vector: RateAllocationVector,
    p2p_only: bool = False,
    tol: float = 1e-9,
) -> list[str]:
    """Verify constraints (i)-(iii) edge by edge; returns violation messages.

    With ``p2p_only`` the secondary sets are treated as hard exclusion (the
    vector must lie in the restricted point-to-point set).
    """
    edges = vector.edges
    idx = {e: i for i, e in enumerate(edges)}
    in_sub = set(edges)
    r = {e: vector.rates[idx[e]] for e in edges}
    bad: list[str] = []
    for e in edges:
        if r[e] < 0:
            bad.append(f"negative rate on edge {e + 1}")
        if r[e] <= 0:
            continue
        for k in graph.main_ifs[e] & in_sub:
            if r[k] > 0:
                bad.append(f"main interference violated between {e + 1} and {k + 1}")
        partners = [k for k in graph.secondary_ifs[e] & in_sub if r[k] > 0]
        if p2p_only and partners:
            bad.append(f"secondary exclusion violated between {e + 1} and {partners[0] + 1}")
            continue
        if not partners:
            if abs(r[e] - graph.p2p_rate[e]) > tol:
                bad.append(f"edge {e + 1} active alone at {r[e]} != c={graph.p2p_rate[e]}")
        elif len(partners) > 1:
            bad.append(f"edge {e + 1} has {len(partners)} co-active secondary partners")
        else:
            k = partners[0]
            a, b = min(e, k), max(e, k)
            region = graph.region(a, b)
            r_a, r_b = r[a], r[b]
            if not cap.on_boundary(region, r_a, r_b, tol):
                bad.append(f"pair ({a + 1},{b + 1}) rates ({r_a},{r_b}) not an operating pair")
            for j in (graph.secondary_ifs[e] | graph.secondary_ifs[k]) & in_sub:
                if j not in (e, k) and r[j] > 0:
                    bad.append(f"third edge {j + 1} active inside secondary sets of ({a + 1},{b + 1})")
    # constraint (iii): a silent edge must interfere with an active one
    for e in edges:
        if r[e] > 0:
            continue
        blocked = any(
            r[k] > 0 for k in (graph.main_ifs[e] | graph.secondary_ifs[e]) & in_sub
        )
        if not blocked:
            bad.append(f"edge {e + 1} idle but unconstrained (maximality)")
    return bad


# ---------------------------------------------------------------------------
# Greedy-reachable vectors for a candidate MW subset
# ---------------------------------------------------------------------------


def enumerate_mgmw_reachable(
    graph: NetworkGraph,
    lmw_links,
    pair_rates: dict[tuple[int, int], tuple[float, float]] | None = None,
    completion_rates: dict[tuple[int, int], list[tuple[float, float]]] | None = None,
) -> list[RateAllocationVector]:
    """Vectors the greedy scheduler can output while lmw_links hold max weight.

    The scheduler exhausts the candidate links first (any order, except
    that a multiuser link is never taken while any equal-weight
    point-to-point candidate is still in contention), then completes the
    schedule maximally over the candidate edge set; all completion orders
    are enumerated and the union returned.
    """
    lmw = sorted(set(lmw_links), key=Link.sort_key)
    edge_subset = tuple(sorted({e for lk in lmw for e in lk.edges}))
    links_t, masks_t = _universe_cached(graph, edge_subset)
    links, masks = list(links_t), list(masks_t)
    pos = {lk: i for i, lk in enumerate(links)}

    lmw_idx = [pos[lk] for lk in lmw]
    lmw_mask = 0
    for i in lmw_idx:
        lmw_mask |= 1 << i
    p2p_mask = 0
    for lk in lmw:
        if not lk.is_multiuser:
            p2p_mask |= 1 << pos[lk]

    # all candidate links tie at the maximum weight, so the point-to-point
    # priority rule blocks every multiuser pick while any point-to-point
    # candidate is still in contention
    def pickable(i: int, alive: int) -> bool:
        if not links[i].is_multiuser:
            return True
        return not alive & p2p_mask

    reached: set[int] = set()
    seen_states: set[tuple[int, int]] = set()

    def walk(alive: int, chosen: int) -> None:
        if (alive, chosen) in seen_states:
            return
        seen_states.add((alive, chosen))
        if alive == 0:
            reached.add(chosen)
            return
        m = alive
        while m:
            i = (m & -m).bit_length() - 1
            m &= m - 1
            if pickable(i, alive):
                walk(alive & ~(masks[i] | (1 << i)), chosen | (1 << i))

    walk(lmw_mask, 0)

    # maximal completions over the remaining compatible links
    full = (1 << len(links)) - 1
    final_sets: set[int] = set()
    for s in reached:
        blocked = s
        m = s
        while m:
            i = (m & -m).bit_length() - 1
            m &= m - 1
            blocked |= masks[i]
        candidates = full & ~blocked
        for comp in _maximal_independent_sets(len(links), masks, restrict=candidates):
            final_sets.add(s | comp)

    fixed_defaults: dict[tuple[int, int], list[tuple[float, float]]] = {}
    for lk in links:
        if not lk.is_multiuser:
            continue
        pair = lk.edges
        if pair_rates is not None and pair in pair_rates and (1 << pos[lk]) & lmw_mask:
            fixed_defaults[pair] = [tuple(pair_rates[pair])]
        elif completion_rates is not None and pair in completion_rates:
            fixed_defaults[pair] = [tuple(p) for p in completion_rates[pair]]
        else:
            fixed_defaults[pair] = _pair_instantiations(graph, pair, "fixed", 0)
    return _vectors_from_link_sets(
        graph, edge_subset, links, sorted(final_sets), fixed_defaults
    )


# ---------------------------------------------------------------------------
# Stability region membership
# ---------------------------------------------------------------------------


def stability_region_contains(graph: NetworkGraph, lam, gamma: float = 1.0) -> bool:
    """True iff lam is dominated by gamma times a convex combination of R.

    Solved as an LP feasibility query: minimise total slack s >= 0 with
    gamma*(R w) + s >= lam, sum(w) = 1, w >= 0.
    """
    import numpy as np

    from .pooling import LpProblem, solve_lp

    lam = np.asarray(lam, dtype=float)
    if lam.shape != (graph.edge_count,):
        raise ValueError("lambda must have one entry per edge")
    if np.any(lam < 0):
        raise ValueError("lambda must be nonnegative")
    vectors = enumerate_rate_vectors(graph, mode="fixed")
    v = np.array([vec.rates for vec in vectors], dtype=float).T  # E x n
    n = v.shape[1]
    e = graph.edge_count
    # variables: w (n), s (E)
    c = np.concatenate([np.zeros(n), np.ones(e)])
    rows = []
    senses = []
    rhs = []
    for i in range(e):
        row = np.concatenate([gamma * v[i], np.eye(e)[i]])
        rows.append(row)
        senses.append(">=")
        rhs.append(lam[i])
    rows.append(np.concatenate([np.ones(n), np.zeros(e)]))
    senses.append("==")
    rhs.append(1.0)
    sol = solve_lp(
        LpProblem(
            c=c,
            a=np.array(rows),
            senses=tuple(senses),
            b=np.array(rhs),
            maximize=False,
        )
    )
    return sol.status == "optimal" and sol.objective <= 1e-9


def vectors_to_csv(vectors: list[RateAllocationVector], path: str | Path) -> None:
    """One row per vector, one 1-based edge column per subset edge."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        if not vectors:
            return
        writer.writerow([f"edge_{e + 1}" for e in vectors[0].edges])
        for vec in vectors:
            writer.writerow([f"{r:.12g}" for r in vec.rates])
