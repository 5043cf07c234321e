"""Destabilising arrival traffics for the greedy schedulers.

The fixed-rate construction seeds the queues (first-slot injection) so
that every candidate link holds the tied maximum weight, then feeds each
slot exactly what the scheduler will serve; with a small probability the
slot additionally delivers a fixed increment vector that preserves the
weight ties, so the candidate-edge queues never decrease and grow without
bound.  The variable-rate construction starts from zero queues and uses a
chosen interior operating point per multiuser link.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import capacity as cap
from .errors import (
    BadEpsilon,
    ConstructionFailed,
    ConvexityViolated,
    CornerOperatingPoint,
    RegionNotFixed,
)
from .net_model import Link, NetworkGraph
from .pooling import CandidateMWSet, _as_candidate, _pair_roles, sigma_upper_lp
from .rate_alloc import enumerate_mgmw_reachable

_RATIONAL_DENOMINATOR_CAP = 10**6
_EQ_TOL = 1e-9


def _pair_constants(graph: NetworkGraph, pair: tuple[int, int], role_k: int):
    """(k, l, c_k, c_l, c_kl, c_lk) with the role-k edge first; fixed regions only."""
    region = graph.region(*pair)
    if not isinstance(region, cap.FixedRegion):
        raise RegionNotFixed(
            f"pair ({pair[0] + 1},{pair[1] + 1}) needs a fixed region for this construction"
        )
    k, l = (pair[0], pair[1]) if role_k == pair[0] else (pair[1], pair[0])
    c_kl = region.c_kl if k == pair[0] else region.c_lk
    c_lk = region.c_lk if k == pair[0] else region.c_kl
    return k, l, graph.p2p_rate[k], graph.p2p_rate[l], c_kl, c_lk


def lemma1_initial_queues(graph: NetworkGraph, lmw) -> np.ndarray:
    """Initial queue vector satisfying the tied-weight equalities.

    Point-to-point candidates j get Q_j = K/c_j; each pair's queues follow
    from the two equalities, with K chosen large enough that the strict
    inequality holds for every pair.  The result is asserted against the
    equalities before being returned.
    """
    cand = _as_candidate(graph, lmw)
    roles = _pair_roles(cand)
    pair_edges = {e for lk in cand.links if lk.is_multiuser for e in lk.edges}
    p2p_solo = [
        lk.edges[0]
        for lk in cand.links
        if not lk.is_multiuser and lk.edges[0] not in pair_edges
    ]

    p = 0.0
    for pair, role_k, _ in roles:
        k, l, c_k, c_l, c_kl, c_lk = _pair_constants(graph, pair, role_k)
        den = c_l * c_kl + c_k * c_lk - c_l * c_k
        if den <= 0:
            raise ConvexityViolated(
                f"pair ({pair[0] + 1},{pair[1] + 1}) rates do not dominate time sharing"
            )
        num = (c_k**2 - c_k * c_kl) * (c_l - c_lk) + c_l * c_lk**2
        p = max(p, num / den)

    caps = [graph.p2p_rate[e] for e in cand.edges]
    k_const = max(caps) * (p + 1.0) + max(c * c for c in caps)

    q0 = np.zeros(graph.edge_count)
    for j in p2p_solo:
        q0[j] = k_const / graph.p2p_rate[j]
    for pair, role_k, _ in roles:
        k, l, c_k, c_l, c_kl, c_lk = _pair_constants(graph, pair, role_k)
        q_k = (k_const + c_k * c_kl - c_k**2) / c_k
        q_l = (q_k * (c_k - c_kl) + c_k**2 - c_k * c_kl) / c_lk
        q0[k], q0[l] = q_k, q_l

    _assert_tied_weights(graph, cand, q0, k_const)
    return q0


def _assert_tied_weights(graph, cand: CandidateMWSet, q0, k_const) -> None:
    for lk in cand.links:
        if lk.is_multiuser:
            continue
        j = lk.edges[0]
        if abs(q0[j] * graph.p2p_rate[j] - k_const) > _EQ_TOL * max(1.0, k_const):
            raise ConstructionFailed(f"point-to-point weight off the common value on {j + 1}")
    for pair, role_k, _ in _pair_roles(cand):
        k, l, c_k, c_l, c_kl, c_lk = _pair_constants(graph, pair, role_k)
        w_pair = q0[k] * c_kl + q0[l] * c_lk
        alt = q0[k] * c_k + c_k**2 - c_k * c_kl
        if abs(w_pair - k_const) > _EQ_TOL * max(1.0, k_const):
            raise ConstructionFailed(f"pair weight off the common value on ({k + 1},{l + 1})")
        if abs(alt - k_const) > _EQ_TOL * max(1.0, k_const):
            raise ConstructionFailed(f"tie identity broken on ({k + 1},{l + 1})")
        if not q0[l] * c_l + c_l * c_lk < k_const:
            raise ConstructionFailed(f"strict inequality failed on ({k + 1},{l + 1})")
        if q0[k] < 0 or q0[l] < 0:
            raise ConstructionFailed("negative initial queue")


def hat_c_increments(
    graph: NetworkGraph,
    lmw,
    mode: str = "theorem2",
    operating_points: dict[tuple[int, int], tuple[float, float]] | None = None,
) -> np.ndarray:
    """Per-edge increment vector solving the weight-preservation equalities.

    The linear system has one free scale, fixed so that min over the
    candidate edges is 1.  theorem5 mode needs an interior operating point
    per pair.
    """
    cand = _as_candidate(graph, lmw)
    roles = _pair_roles(cand)
    pair_edges = {e for lk in cand.links if lk.is_multiuser for e in lk.edges}
    hat = np.zeros(graph.edge_count)
    k_hat = 1.0
    for lk in cand.links:
        if not lk.is_multiuser and lk.edges[0] not in pair_edges:
            j = lk.edges[0]
            hat[j] = k_hat / graph.p2p_rate[j]
    for pair, role_k, _ in roles:
        k, l = (pair[0], pair[1]) if role_k == pair[0] else (pair[1], pair[0])
        c_k, c_l = graph.p2p_rate[k], graph.p2p_rate[l]
        if mode == "theorem2":
            _, _, _, _, c_kl, c_lk = _pair_constants(graph, pair, role_k)
            h_k = k_hat / c_k
            h_l = h_k * (c_k - c_kl) / c_lk
        elif mode == "theorem5":
            if operating_points is None or pair not in operating_points:
                raise ConstructionFailed(f"no operating point for pair ({pair[0] + 1},{pair[1] + 1})")
            ck_o, cl_o = operating_points[pair]
            if k != pair[0]:
                ck_o, cl_o = cl_o, ck_o
            if ck_o <= 0 or cl_o <= 0:
                raise CornerOperatingPoint("operating point must have both rates positive")
            h_k = k_hat * ck_o / (ck_o**2 + cl_o**2)
            h_l = h_k * cl_o / ck_o
        else:
            raise ValueError(f"unknown mode {mode!r}")
        if h_k <= 0 or h_l <= 0:
            raise ConstructionFailed("increment solve produced a nonpositive entry")
        hat[k], hat[l] = h_k, h_l
    active = [hat[e] for e in cand.edges]
    if not active or min(active) <= 0:
        raise ConstructionFailed("increment system inconsistent")
    hat /= min(active)
    if mode == "theorem2":
        for pair, role_k, _ in roles:
            k, l, c_k, c_l, c_kl, c_lk = _pair_constants(graph, pair, role_k)
            if not hat[k] * c_k > hat[l] * c_l:
                raise ConstructionFailed(f"strict increment inequality failed on ({k + 1},{l + 1})")
    return hat


def _rationalize(weights, delta_rat: float) -> list[Fraction]:
    fracs = [Fraction(float(w)).limit_denominator(_RATIONAL_DENOMINATOR_CAP) for w in weights]
    total = sum(fracs)
    # put the closing adjustment on the heaviest weight
    idx = max(range(len(fracs)), key=lambda i: fracs[i])
    fracs[idx] += 1 - total
    drift = sum(abs(float(f) - float(w)) for f, w in zip(fracs, weights))
    if drift > delta_rat + 1e-12:
        raise ConstructionFailed(f"rationalisation drift {drift} exceeds {delta_rat}")
    if any(f < 0 for f in fracs):
        raise ConstructionFailed("rationalisation produced a negative weight")
    return fracs


def _arrival_pattern(
    graph: NetworkGraph,
    cand: CandidateMWSet,
    vec,
    pair_points: dict[tuple[int, int], tuple[float, float]] | None,
) -> np.ndarray:
    """Arrivals matching one reachable vector: candidate links are fed what
    they serve; anything else the vector schedules makes the construction
    unsound and is rejected."""
    pattern = np.zeros(graph.edge_count)
    for lk in cand.links:
        if lk.is_multiuser:
            k, l = lk.edges
            if vec.rate_of(k) > 0 and vec.rate_of(l) > 0:
                if pair_points is not None:
                    pattern[k], pattern[l] = pair_points[(k, l)]
                else:
                    region = graph.region(k, l)
                    pattern[k], pattern[l] = region.c_kl, region.c_lk
        else:
            j = lk.edges[0]
            if vec.rate_of(j) > 0:
                pattern[j] = graph.p2p_rate[j]
    for e in cand.edges:
        r = vec.rate_of(e)
        if r > 0 and abs(pattern[e] - r) > 1e-9:
            raise ConstructionFailed(
                f"edge {e + 1} is served at {r} but fed {pattern[e]}; "
                "this candidate set does not support the construction"
            )
    return pattern


@dataclass(frozen=True)
class TheoremTraffic:
    """Adversarial arrival process; arrivals are patterns plus increments."""

    mode: str
    patterns: tuple[tuple[float, ...], ...]
    weights: tuple[float, ...]
    epsilon: float
    q0: tuple[float, ...]
    hat_c: tuple[float, ...]
    spec_json: str  # serialized AdversarialSpec for reproducibility

    def sample_matrix(self, graph: NetworkGraph, horizon: int, seed: int) -> np.ndarray:
        rng = np.random.Generator(np.random.PCG64(seed))
        p = np.asarray(self.weights, dtype=float)
        p = p / p.sum()
        idx = rng.choice(len(self.patterns), size=horizon, p=p)
        arr = np.asarray(self.patterns, dtype=float)[idx]
        if self.epsilon > 0:
            bump = rng.random(horizon) < self.epsilon
            arr[bump] += np.asarray(self.hat_c)
        arr[0] += np.asarray(self.q0)
        return arr

    @property
    def rate(self) -> np.ndarray:
        """Long-run arrival rate: weighted patterns plus epsilon times the increment."""
        p = np.asarray(self.weights, dtype=float)
        base = np.asarray(self.patterns, dtype=float)
        return (p / p.sum()) @ base + self.epsilon * np.asarray(self.hat_c)


def _spec_doc(mode, cand, roles, fracs, epsilon, q0, hat, patterns, seed) -> dict:
    return {
        "mode": mode,
        "links": [lk.label() for lk in cand.links],
        "roles": {f"{p[0] + 1}-{p[1] + 1}": k + 1 for p, k, _ in roles},
        "weights": [str(f) for f in fracs],
        "epsilon": epsilon,
        "Q0": [float(v) for v in q0],
        "hat_c": [float(v) for v in hat],
        "patterns": [[float(v) for v in row] for row in patterns],
        "seed": seed,
    }


def build_theorem2_traffic(
    graph: NetworkGraph,
    lmw,
    epsilon: float,
    delta_rat: float = 1e-6,
    seed: int = 0,
    decomposition: list[tuple] | None = None,
) -> TheoremTraffic:
    """Fixed-rate destabilising traffic for a candidate subset.

    ``decomposition`` is a list of (reachable vector, weight) pairs; by
    default it is taken from the upper-bound LP witness.  The arrival rate
    is the rationalised combination of the fed patterns plus epsilon times
    the increment vector.
    """
    if not 0.0 < epsilon < 1.0:
        raise BadEpsilon(f"epsilon must lie in (0, 1), got {epsilon}")
    cand = _as_candidate(graph, lmw)
    if decomposition is None:
        upper = sigma_upper_lp(graph, cand)
        tilde = enumerate_mgmw_reachable(graph, list(cand.links))
        decomposition = [
            (vec, float(b)) for vec, b in zip(tilde, upper.beta) if b > 1e-9
        ]
    vecs = [v for v, _ in decomposition]
    weights = [w for _, w in decomposition]
    fracs = _rationalize(weights, delta_rat)
    patterns = [_arrival_pattern(graph, cand, v, None) for v in vecs]
    q0 = lemma1_initial_queues(graph, cand)
    hat = hat_c_increments(graph, cand, mode="theorem2")
    roles = _pair_roles(cand)
    doc = _spec_doc("theorem2", cand, roles, fracs, epsilon, q0, hat, patterns, seed)
    return TheoremTraffic(
        mode="theorem2",
        patterns=tuple(tuple(row) for row in patterns),
        weights=tuple(float(f) for f in fracs),
        epsilon=epsilon,
        q0=tuple(float(v) for v in q0),
        hat_c=tuple(float(v) for v in hat),
        spec_json=json.dumps(doc),
    )


def build_theorem5_traffic(
    graph: NetworkGraph,
    lmw,
    operating_points: dict[tuple[int, int], tuple[float, float]],
    epsilon: float,
    seed: int = 0,
) -> TheoremTraffic:
    """Variable-rate destabilising traffic from zero queues.

    Each pair in the candidate set runs at a chosen interior boundary
    point; uniform weights over the scheduler-assignable vectors at those
    points.
    """
    if not 0.0 <= epsilon < 1.0:
        raise BadEpsilon(f"epsilon must lie in [0, 1), got {epsilon}")
    cand = _as_candidate(graph, lmw)
    pair_points = {}
    for lk in cand.links:
        if not lk.is_multiuser:
            continue
        pair = lk.edges
        if pair not in operating_points:
            raise ConstructionFailed(f"no operating point for pair ({pair[0] + 1},{pair[1] + 1})")
        r_k, r_l = operating_points[pair]
        if r_k <= 0 or r_l <= 0:
            raise CornerOperatingPoint("operating point must have both rates positive")
        region = graph.region(*pair)
        if not cap.on_boundary(region, r_k, r_l, 1e-9):
            raise ConstructionFailed(
                f"({r_k}, {r_l}) is not a boundary point of pair ({pair[0] + 1},{pair[1] + 1})"
            )
        pair_points[pair] = (r_k, r_l)
    tilde = enumerate_mgmw_reachable(graph, list(cand.links), pair_rates=pair_points)
    patterns = [_arrival_pattern(graph, cand, v, pair_points) for v in tilde]
    fracs = [Fraction(1, len(patterns))] * len(patterns)
    hat = hat_c_increments(graph, cand, mode="theorem5", operating_points=pair_points)
    q0 = np.zeros(graph.edge_count)
    roles = _pair_roles(cand)
    doc = _spec_doc("theorem5", cand, roles, fracs, epsilon, q0, hat, patterns, seed)
    return TheoremTraffic(
        mode="theorem5",
        patterns=tuple(tuple(row) for row in patterns),
        weights=tuple(float(f) for f in fracs),
        epsilon=epsilon,
        q0=tuple(float(v) for v in q0),
        hat_c=tuple(float(v) for v in hat),
        spec_json=json.dumps(doc),
    )


def save_spec(traffic: TheoremTraffic, path: str | Path) -> None:
    with open(path, "w") as f:
        f.write(traffic.spec_json)
        f.write("\n")
