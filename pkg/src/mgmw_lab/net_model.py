"""Network graph, per-edge interference sets, and the link set.

Every edge carries a main interference set X (edges that can never be
co-active with it) and a secondary interference set Y (edges that may be
co-active with it only as a joint multiuser link at reduced rates).  Edge
ids are dense 0-based integers; external files use 1-based labels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import capacity as cap
from .errors import InvalidMultiuserPair


@dataclass(frozen=True, order=True)
class Link:
    """A schedulable unit: one edge, or an ordered multiuser pair k < l."""

    edges: tuple[int, ...]

    def __post_init__(self):
        if len(self.edges) == 2 and not self.edges[0] < self.edges[1]:
            raise ValueError("multiuser link edges must be canonically ordered k < l")

    @property
    def is_multiuser(self) -> bool:
        return len(self.edges) == 2

    @staticmethod
    def p2p(j: int) -> "Link":
        return Link((j,))

    @staticmethod
    def multiuser(k: int, l: int) -> "Link":
        return Link((min(k, l), max(k, l)))

    def sort_key(self) -> tuple:
        # edges ascending first, then pairs lexicographic
        return (self.is_multiuser, self.edges)

    def label(self) -> str:
        if self.is_multiuser:
            return f"({self.edges[0] + 1},{self.edges[1] + 1})"
        return str(self.edges[0] + 1)


@dataclass(frozen=True)
class Violation:
    """One invariant violation found by validate_graph."""

    kind: str
    edges: tuple[int, ...]

    def __str__(self) -> str:
        labels = ",".join(str(e + 1) for e in self.edges)
        return f"{self.kind}({labels})"


@dataclass(frozen=True)
class NetworkGraph:
    """Immutable network description: edges, rates, interference sets, regions.

    ``regions`` maps each unordered secondary pair {k, l} (stored as the
    ordered tuple (k, l), k < l) to its capacity region.  ``endpoints`` is
    optional; when present the interference sets can be re-derived from it.
    """

    edge_count: int
    p2p_rate: tuple[float, ...]
    main_ifs: tuple[frozenset[int], ...]
    secondary_ifs: tuple[frozenset[int], ...]
    regions: tuple[tuple[tuple[int, int], cap.CapacityRegion], ...] = ()
    endpoints: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "_region_map", dict(self.regions))

    def region(self, k: int, l: int) -> cap.CapacityRegion:
        return self._region_map[(min(k, l), max(k, l))]

    def has_region(self, k: int, l: int) -> bool:
        return (min(k, l), max(k, l)) in self._region_map

    @property
    def multiuser_pairs(self) -> list[tuple[int, int]]:
        return sorted(self._region_map)

    def all_fixed(self) -> bool:
        return all(isinstance(r, cap.FixedRegion) for _, r in self.regions)

    def conflict_closure(self, e: int) -> frozenset[int]:
        """Edges that cannot be active while e is active as point-to-point."""
        return self.main_ifs[e] | self.secondary_ifs[e]


def make_graph(
    p2p_rate,
    main_ifs,
    secondary_ifs,
    regions: dict[tuple[int, int], cap.CapacityRegion] | None = None,
    endpoints=None,
) -> NetworkGraph:
    """Normalise plain containers into a hashable NetworkGraph."""
    rates = tuple(float(c) for c in p2p_rate)
    e = len(rates)
    graph = NetworkGraph(
        edge_count=e,
        p2p_rate=rates,
        main_ifs=tuple(frozenset(s) for s in main_ifs),
        secondary_ifs=tuple(frozenset(s) for s in secondary_ifs),
        regions=tuple(sorted((tuple(sorted(p)), r) for p, r in (regions or {}).items())),
        endpoints=tuple((int(a), int(b)) for a, b in endpoints) if endpoints else None,
    )
    return graph


def derive_node_exclusive_sets(topology, multiuser_pairs):
    """Derive (X, Y) sets from endpoints under node-exclusive interference.

    Two edges sharing any node conflict; a declared multiuser pair (shared
    transmitter = broadcast, shared receiver = multiple access) goes into Y
    instead of X.
    """
    eps = [(int(a), int(b)) for a, b in topology]
    e = len(eps)
    declared = set()
    for k, l in multiuser_pairs:
        k, l = int(k), int(l)
        if k == l or not (0 <= k < e and 0 <= l < e):
            raise InvalidMultiuserPair(f"pair ({k + 1},{l + 1}) is not two distinct edges")
        (tk, rk), (tl, rl) = eps[k], eps[l]
        shares_tx = tk == tl
        shares_rx = rk == rl
        if shares_tx and shares_rx:
            raise InvalidMultiuserPair(
                f"edges {k + 1} and {l + 1} are parallel; cannot form a multiuser link"
            )
        if not (shares_tx or shares_rx):
            raise InvalidMultiuserPair(
                f"edges {k + 1} and {l + 1} share no transmitter or receiver"
            )
        declared.add((min(k, l), max(k, l)))

    main = [set() for _ in range(e)]
    secondary = [set() for _ in range(e)]
    for i in range(e):
        for j in range(i + 1, e):
            if set(eps[i]) & set(eps[j]):
                if (i, j) in declared:
                    secondary[i].add(j)
                    secondary[j].add(i)
                else:
                    main[i].add(j)
                    main[j].add(i)
    return [frozenset(s) for s in main], [frozenset(s) for s in secondary]


def enumerate_links(graph: NetworkGraph) -> list[Link]:
    """All point-to-point links plus one multiuser link per secondary pair."""
    links = [Link.p2p(j) for j in range(graph.edge_count)]
    links += [Link.multiuser(k, l) for k, l in graph.multiuser_pairs]
    links.sort(key=Link.sort_key)
    return links


def validate_graph(graph: NetworkGraph) -> list[Violation]:
    """Check every structural invariant; violations are returned, not raised."""
    out: list[Violation] = []
    e = graph.edge_count
    if len(graph.p2p_rate) != e or len(graph.main_ifs) != e or len(graph.secondary_ifs) != e:
        out.append(Violation("LengthMismatch", ()))
        return out
    for l in range(e):
        if graph.p2p_rate[l] <= 0:
            out.append(Violation("NonpositiveRate", (l,)))
        for s in (graph.main_ifs[l], graph.secondary_ifs[l]):
            for k in s:
                if not 0 <= k < e:
                    out.append(Violation("BadEdgeRef", (l, k)))
        if l in graph.main_ifs[l] or l in graph.secondary_ifs[l]:
            out.append(Violation("SelfInterference", (l,)))
        if graph.main_ifs[l] & graph.secondary_ifs[l]:
            bad = min(graph.main_ifs[l] & graph.secondary_ifs[l])
            out.append(Violation("MainSecondaryOverlap", (l, bad)))
    for l in range(e):
        for k in graph.main_ifs[l]:
            if 0 <= k < e and l not in graph.main_ifs[k]:
                out.append(Violation("MainAsymmetry", (min(k, l), max(k, l))))
        for k in graph.secondary_ifs[l]:
            if 0 <= k < e and l not in graph.secondary_ifs[k]:
                out.append(Violation("SecondaryAsymmetry", (min(k, l), max(k, l))))
    # every secondary pair needs exactly one region, and vice versa
    pairs = {
        (min(k, l), max(k, l))
        for l in range(e)
        for k in graph.secondary_ifs[l]
        if 0 <= k < e
    }
    declared = set(graph.multiuser_pairs)
    for p in sorted(pairs - declared):
        out.append(Violation("MissingRegion", p))
    for p in sorted(declared - pairs):
        out.append(Violation("RegionWithoutPair", p))
    # region corners must agree with the point-to-point capacities
    for k, l in sorted(declared & pairs):
        region = graph.region(k, l)
        if (
            abs(region.c_k - graph.p2p_rate[k]) > 1e-9
            or abs(region.c_l - graph.p2p_rate[l]) > 1e-9
        ):
            out.append(Violation("RegionCornerMismatch", (k, l)))
    # deduplicate, keep deterministic order
    seen = []
    for v in out:
        if v not in seen:
            seen.append(v)
    return seen


# ---------------------------------------------------------------------------
# Graph file round-trip (JSON, 1-based edge labels)
# ---------------------------------------------------------------------------


def _region_to_json(region: cap.CapacityRegion) -> dict:
    if isinstance(region, cap.FixedRegion):
        return {"fixed": [region.c_kl, region.c_lk]}
    if isinstance(region, cap.GaussianBCRegion):
        return {"gaussian_bc": {"P": region.power, "Nk": region.noise_k, "Nl": region.noise_l}}
    return {"sampled": [list(p) for p in region.points]}


def _region_from_json(spec: dict, c_k: float, c_l: float) -> cap.CapacityRegion:
    if "fixed" in spec:
        c_kl, c_lk = spec["fixed"]
        return cap.make_fixed_region(c_k, c_l, float(c_kl), float(c_lk))
    if "gaussian_bc" in spec:
        g = spec["gaussian_bc"]
        return cap.GaussianBCRegion(float(g["P"]), float(g["Nk"]), float(g["Nl"]))
    if "sampled" in spec:
        return cap.make_sampled_region(spec["sampled"])
    raise ValueError(f"unknown region spec {spec!r}")


def graph_to_json(graph: NetworkGraph) -> dict:
    doc: dict = {
        "edges": (
            [list(ep) for ep in graph.endpoints] if graph.endpoints else graph.edge_count
        ),
        "p2p_rates": list(graph.p2p_rate),
        "X": [sorted(e + 1 for e in s) for s in graph.main_ifs],
        "Y": [sorted(e + 1 for e in s) for s in graph.secondary_ifs],
        "regions": {
            f"{k + 1}-{l + 1}": _region_to_json(graph.region(k, l))
            for k, l in graph.multiuser_pairs
        },
    }
    return doc


def graph_from_json(doc: dict) -> NetworkGraph:
    rates = [float(c) for c in doc["p2p_rates"]]
    e = len(rates)
    endpoints = None
    edges_field = doc.get("edges", e)
    if isinstance(edges_field, list):
        endpoints = [tuple(ep) for ep in edges_field]

    if "topology" in doc:
        endpoints = [tuple(ep) for ep in doc["topology"]]
        pairs0 = [(int(k) - 1, int(l) - 1) for k, l in doc.get("multiuser_pairs", [])]
        main, secondary = derive_node_exclusive_sets(endpoints, pairs0)
    else:
        main = [frozenset(int(k) - 1 for k in s) for s in doc["X"]]
        secondary = [frozenset(int(k) - 1 for k in s) for s in doc["Y"]]

    regions: dict[tuple[int, int], cap.CapacityRegion] = {}
    for key, spec in doc.get("regions", {}).items():
        k_s, l_s = key.split("-")
        k, l = int(k_s) - 1, int(l_s) - 1
        k, l = min(k, l), max(k, l)
        regions[(k, l)] = _region_from_json(spec, rates[k], rates[l])
    return make_graph(rates, main, secondary, regions, endpoints)


def load_graph(path: str | Path) -> NetworkGraph:
    with open(path) as f:
        return graph_from_json(json.load(f))


def save_graph(graph: NetworkGraph, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump(graph_to_json(graph), f, indent=2)
        f.write("\n")
