"""Time-slotted queue simulation driving any scheduler with any arrivals.

Packets arrive at the start of every slot, service follows within the
slot: Q(t+1) = Q(t) + A(t) - min(Q(t) + A(t), r(t)).  All randomness comes
from numpy's PCG64 generator seeded per run, so traces are bit-identical
across platforms for identical inputs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import UnknownScheduler
from .net_model import NetworkGraph
from .sched import SCHEDULERS, get_runtime

try:
    from numba import njit
except ImportError:  # pragma: no cover

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@njit(cache=True)
def _greedy_sim_kernel(arr, q, e1, e2, r1, r2, conf, queues, served):
    """Whole-horizon loop for the fixed-rate greedy schedulers.

    Selection per slot: repeated argmax over link weights with ties going
    to point-to-point links (e2 < 0) and then to the lowest link index.
    The queue update uses q + (a - served) so that a slot whose service
    exactly matches its arrivals leaves the queue bit-identical.
    """
    horizon, n_edges = arr.shape
    n_links = e1.shape[0]
    w = np.empty(n_links)
    qa = np.empty(n_edges)
    rates = np.empty(n_edges)
    for t in range(horizon):
        for i in range(n_edges):
            qa[i] = q[i] + arr[t, i]
            rates[i] = 0.0
        for i in range(n_links):
            if e2[i] >= 0:
                w[i] = qa[e1[i]] * r1[i] + qa[e2[i]] * r2[i]
            else:
                w[i] = qa[e1[i]] * r1[i]
        dead = np.int64(0)
        picked = 0
        while picked < n_links:
            best = -1
            for i in range(n_links):
                if not (dead >> i) & 1:
                    if best < 0:
                        best = i
                    elif w[i] > w[best]:
                        best = i
                    elif w[i] == w[best] and e2[i] < 0 and e2[best] >= 0:
                        best = i
            if best < 0:
                break
            dead |= conf[best] | (np.int64(1) << best)
            picked += 1
            rates[e1[best]] = r1[best]
            if e2[best] >= 0:
                rates[e2[best]] = r2[best]
        for i in range(n_edges):
            r = rates[i]
            if r < qa[i]:
                served[t, i] = r
                q[i] = q[i] + (arr[t, i] - r)
            else:
                served[t, i] = qa[i]
                q[i] = 0.0
            queues[t, i] = q[i]


@dataclass(frozen=True)
class BernoulliArrivals:
    """Per-edge Bernoulli batches: payload packets with probability lam/payload."""

    rates: tuple[float, ...]
    payload: float = 1.0

    def sample_matrix(self, graph: NetworkGraph, horizon: int, seed: int) -> np.ndarray:
        lam = np.asarray(self.rates, dtype=float)
        if lam.shape != (graph.edge_count,):
            raise ValueError("arrival rates must have one entry per edge")
        p = lam / self.payload
        if np.any(p > 1.0) or np.any(p < 0.0):
            raise ValueError("payload too small for the requested rates")
        rng = np.random.Generator(np.random.PCG64(seed))
        return (rng.random((horizon, graph.edge_count)) < p) * self.payload


@dataclass(frozen=True)
class IIDBatchArrivals:
    """Arbitrary i.i.d. per-slot sampler: sampler(rng) -> per-edge array."""

    sampler: object

    def sample_matrix(self, graph: NetworkGraph, horizon: int, seed: int) -> np.ndarray:
        rng = np.random.Generator(np.random.PCG64(seed))
        rows = [np.asarray(self.sampler(rng), dtype=float) for _ in range(horizon)]
        return np.vstack(rows)


@dataclass
class Trace:
    """Per-slot queues (end of slot), arrivals, and served rates."""

    graph: NetworkGraph
    scheduler: str
    seed: int
    queues: np.ndarray  # T x E, after service
    arrivals: np.ndarray  # T x E
    served: np.ndarray  # T x E

    @property
    def horizon(self) -> int:
        return self.queues.shape[0]

    def total_queue(self) -> np.ndarray:
        return self.queues.sum(axis=1)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["t", "edge", "queue", "arrivals", "served"])
            t_count, e_count = self.queues.shape
            for t in range(t_count):
                for e in range(e_count):
                    writer.writerow(
                        [
                            t,
                            e + 1,
                            f"{self.queues[t, e]:.12g}",
                            f"{self.arrivals[t, e]:.12g}",
                            f"{self.served[t, e]:.12g}",
                        ]
                    )


def run_simulation(
    graph: NetworkGraph,
    scheduler: str,
    arrivals,
    horizon: int,
    seed: int = 0,
    initial_queues=None,
) -> Trace:
    """Simulate ``horizon`` slots; deterministic given the seed.

    The queue update is computed as q + (a - served) so that a slot whose
    service exactly matches its arrivals leaves the queue bit-identical.
    """
    if scheduler not in SCHEDULERS:
        raise UnknownScheduler(f"unknown scheduler id {scheduler!r}")
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    runtime = get_runtime(graph, scheduler)
    e = graph.edge_count
    arr = np.asarray(arrivals.sample_matrix(graph, horizon, seed), dtype=float)
    if arr.shape != (horizon, e):
        raise ValueError("arrival matrix has the wrong shape")

    queues = np.empty((horizon, e), dtype=float)
    served = np.empty((horizon, e), dtype=float)
    q0 = np.zeros(e) if initial_queues is None else np.asarray(initial_queues, dtype=float)

    if scheduler in ("mgmw", "gmm"):
        _greedy_sim_kernel(
            np.ascontiguousarray(arr),
            q0.copy(),
            runtime.arr_e1,
            runtime.arr_e2,
            runtime.arr_r1,
            runtime.arr_r2,
            runtime.arr_conf,
            queues,
            served,
        )
    else:
        q = list(q0)
        arr_rows = arr.tolist()
        select = runtime.select
        for t in range(horizon):
            a = arr_rows[t]
            rates, _ = select([qi + ai for qi, ai in zip(q, a)])
            row_served = served[t]
            for i in range(e):
                qa = q[i] + a[i]
                r = rates[i]
                if r < qa:
                    row_served[i] = r
                    q[i] = q[i] + (a[i] - r)
                else:
                    row_served[i] = qa
                    q[i] = 0.0
            queues[t] = q
    return Trace(
        graph=graph, scheduler=scheduler, seed=seed, queues=queues, arrivals=arr, served=served
    )


@dataclass
class StabilityEstimate:
    slope: float
    verdict: str  # stable | unstable | inconclusive
    window_start: int


def estimate_stability(trace: Trace, window: float = 0.5) -> StabilityEstimate:
    """Least-squares slope of the total queue over the trailing window.

    Thresholds scale with the largest point-to-point rate: unstable above
    0.05*max(c) per slot, stable below 0.005*max(c).
    """
    if not 0.0 < window < 1.0:
        raise ValueError("window fraction must be in (0, 1)")
    if trace.horizon < 100:
        raise ValueError("trace too short for a stability estimate")
    total = trace.total_queue()
    start = int(len(total) * (1.0 - window))
    tail = total[start:]
    t = np.arange(len(tail), dtype=float)
    slope = float(np.polyfit(t, tail, 1)[0]) if len(tail) > 1 else 0.0
    c_max = max(trace.graph.p2p_rate)
    theta_hi = 0.05 * c_max
    theta_lo = 0.005 * c_max
    if slope > theta_hi:
        verdict = "unstable"
    elif slope < theta_lo:
        verdict = "stable"
    else:
        verdict = "inconclusive"
    return StabilityEstimate(slope=slope, verdict=verdict, window_start=start)


def summary_rows_to_csv(rows: list[dict], path: str | Path) -> None:
    """Sweep summary: one row per (scheduler, seed, lambda_scale) run."""
    fields = ["scheduler", "seed", "lambda_scale", "total_queue_final", "slope", "verdict"]
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in fields})
