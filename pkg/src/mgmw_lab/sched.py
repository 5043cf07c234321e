"""The four schedulers: fixed-rate greedy, variable-rate greedy, the
point-to-point-only greedy baseline, and exact Max-Weight.

The greedy schedulers weigh every link by its queue-weighted rate, pick
links in descending weight (point-to-point wins ties against multiuser,
remaining ties go to the lowest canonical link index), and remove
conflicting links after each pick until nothing is left.  Links with zero
weight are still scheduled when non-conflicting, so the output is always
maximal.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import capacity as cap
from .errors import RegionNotFixed, UnknownScheduler
from .net_model import Link, NetworkGraph, enumerate_links
from .rate_alloc import (
    RateAllocationVector,
    conflict_masks,
    enumerate_rate_vectors,
)

SCHEDULERS = ("mgmw", "vrmgmw", "gmm", "maxweight")


class SchedulerRuntime:
    """Precomputed link tables for one (graph, scheduler) pair.

    ``select(q)`` returns (per-edge rates list, active link/rate pairs) and
    is deterministic in its inputs.
    """

    def __init__(self, graph: NetworkGraph, scheduler: str):
        if scheduler not in SCHEDULERS:
            raise UnknownScheduler(f"unknown scheduler id {scheduler!r}")
        self.graph = graph
        self.scheduler = scheduler
        self.edge_count = graph.edge_count

        if scheduler == "gmm":
            self.links = [Link.p2p(j) for j in range(graph.edge_count)]
            # secondary sets are hard exclusion for the baseline
            self.masks = [0] * len(self.links)
            for i in range(len(self.links)):
                for j in range(i + 1, len(self.links)):
                    if j in graph.conflict_closure(i):
                        self.masks[i] |= 1 << j
                        self.masks[j] |= 1 << i
        else:
            self.links = enumerate_links(graph)
            self.masks = conflict_masks(graph, self.links)

        if scheduler == "mgmw" and not graph.all_fixed():
            raise RegionNotFixed("fixed-rate scheduling requires fixed regions")

        self._fixed_pairs = {}
        for k, l in graph.multiuser_pairs:
            region = graph.region(k, l)
            if isinstance(region, cap.FixedRegion):
                self._fixed_pairs[(k, l)] = (region.c_kl, region.c_lk)

        # per-link static data for the hot loop
        self._edges = [lk.edges for lk in self.links]
        self._is_mu = [lk.is_multiuser for lk in self.links]

        if scheduler == "maxweight":
            mode = "fixed" if graph.all_fixed() else "with_region_corners"
            self._vectors = enumerate_rate_vectors(graph, mode=mode)
            self._vmat = np.array([v.rates for v in self._vectors])

        if scheduler in ("mgmw", "gmm"):
            # flat arrays consumed by the compiled greedy simulation kernel
            n = len(self.links)
            self.arr_e1 = np.empty(n, dtype=np.int64)
            self.arr_e2 = np.full(n, -1, dtype=np.int64)
            self.arr_r1 = np.empty(n)
            self.arr_r2 = np.zeros(n)
            self.arr_conf = np.array(self.masks, dtype=np.int64)
            for i, lk in enumerate(self.links):
                if lk.is_multiuser:
                    k, l = lk.edges
                    self.arr_e1[i], self.arr_e2[i] = k, l
                    self.arr_r1[i], self.arr_r2[i] = self._fixed_pairs[(k, l)]
                else:
                    self.arr_e1[i] = lk.edges[0]
                    self.arr_r1[i] = graph.p2p_rate[lk.edges[0]]

    # -- greedy pass ------------------------------------------------------

    def _weigh(self, q) -> list[tuple[float, tuple[float, ...]] | None]:
        """Weight and operating rates per link; None marks a skipped link."""
        graph = self.graph
        rates = graph.p2p_rate
        out: list[tuple[float, tuple[float, ...]] | None] = []
        for lk, edges in zip(self.links, self._edges):
            if not lk.is_multiuser:
                j = edges[0]
                out.append((q[j] * rates[j], (rates[j],)))
            elif self.scheduler in ("mgmw", "gmm"):
                k, l = edges
                c_kl, c_lk = self._fixed_pairs[(k, l)]
                out.append((q[k] * c_kl + q[l] * c_lk, (c_kl, c_lk)))
            else:  # variable rate: maximise over the whole region
                k, l = edges
                if q[k] == 0.0 and q[l] == 0.0:
                    out.append(None)
                    continue
                point, weight = cap.max_weight_point(graph.region(k, l), q[k], q[l])
                if point.r_k == 0.0 or point.r_l == 0.0:
                    # corner, so the link competes as a point-to-point link
                    out.append(None)
                else:
                    out.append((weight, (point.r_k, point.r_l)))
        return out

    def select(self, q) -> tuple[list[float], list[tuple[Link, tuple[float, ...]]]]:
        if self.scheduler == "maxweight":
            return self._select_maxweight(q)
        weighed = self._weigh(q)
        order = sorted(
            (i for i in range(len(self.links)) if weighed[i] is not None),
            key=lambda i: (-weighed[i][0], self._is_mu[i], i),
        )
        rates = [0.0] * self.edge_count
        active: list[tuple[Link, tuple[float, ...]]] = []
        dead = 0
        for i in order:
            if dead >> i & 1:
                continue
            dead |= self.masks[i] | (1 << i)
            _, op = weighed[i]
            for e, r in zip(self._edges[i], op):
                rates[e] = r
            active.append((self.links[i], op))
        return rates, active

    def _select_maxweight(self, q):
        values = self._vmat @ np.asarray(q, dtype=float)
        best_i = int(np.argmax(values))  # first max = canonical vector order
        vec = self._vectors[best_i]
        return list(vec.rates), list(vec.active_links)


@lru_cache(maxsize=128)
def get_runtime(graph: NetworkGraph, scheduler: str) -> SchedulerRuntime:
    return SchedulerRuntime(graph, scheduler)


def _as_vector(graph: NetworkGraph, rates, active) -> RateAllocationVector:
    return RateAllocationVector(
        edges=tuple(range(graph.edge_count)),
        rates=tuple(rates),
        active_links=tuple(sorted(active, key=lambda t: t[0].sort_key())),
    )


def mgmw_schedule(graph: NetworkGraph, queues) -> RateAllocationVector:
    """Fixed-rate greedy schedule for one slot."""
    rates, active = get_runtime(graph, "mgmw").select(list(queues))
    return _as_vector(graph, rates, active)


def vr_mgmw_schedule(graph: NetworkGraph, queues) -> RateAllocationVector:
    """Variable-rate greedy schedule: multiuser weights maximised per slot."""
    rates, active = get_runtime(graph, "vrmgmw").select(list(queues))
    return _as_vector(graph, rates, active)


def gmm_schedule(graph: NetworkGraph, queues) -> RateAllocationVector:
    """Greedy baseline without multiuser links (secondary sets exclude)."""
    rates, active = get_runtime(graph, "gmm").select(list(queues))
    return _as_vector(graph, rates, active)


def maxweight_schedule(graph: NetworkGraph, queues) -> RateAllocationVector:
    """Exact Max-Weight: argmax of queue-weighted rate over all vectors."""
    rates, active = get_runtime(graph, "maxweight").select(list(queues))
    return _as_vector(graph, rates, active)
