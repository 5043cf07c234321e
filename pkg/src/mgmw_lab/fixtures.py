"""Built-in example networks, shipped as graph files under fixtures/.

Builders are provided for the variants tests like to parameterise (unit
capacities, custom regions); the JSON files are the CLI-facing form.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from . import capacity as cap
from .net_model import NetworkGraph, load_graph, make_graph

FIXTURE_NAMES = ("fig2", "fig3", "fig5", "fig6a", "fig7a")


def fixture_path(name: str) -> Path:
    if name not in FIXTURE_NAMES:
        raise KeyError(f"unknown fixture {name!r}; choices: {FIXTURE_NAMES}")
    return Path(str(resources.files("mgmw_lab").joinpath("fixtures", f"{name}.json")))


def load_fixture(name: str) -> NetworkGraph:
    return load_graph(fixture_path(name))


def fig2_graph() -> NetworkGraph:
    """Five-edge network with broadcast pairs (1,2) and (4,5).

    Interference sets are fixture data (the published table), not derived
    from a topology.
    """
    rates = (4.0, 6.0, 2.0, 8.0, 5.0)
    main = [{2}, {2, 3}, {0, 1, 4}, {1}, {2}]
    secondary = [{1}, {0}, set(), {4}, {3}]
    regions = {
        (0, 1): cap.make_fixed_region(4.0, 6.0, 3.0, 4.0),
        (3, 4): cap.make_fixed_region(8.0, 5.0, 4.0, 3.0),
    }
    return make_graph(rates, main, secondary, regions)


def fig3_graph(pair_rate: float = 0.75) -> NetworkGraph:
    """Twelve-edge ring with six broadcast links, unit point-to-point rates.

    Consecutive even/odd edges share a receiver (main interference); each
    odd edge and its successor share a transmitter (broadcast pair), so the
    point-to-point conflict graph is a 12-cycle.
    """
    e = 12
    rates = (1.0,) * e
    main = [set() for _ in range(e)]
    secondary = [set() for _ in range(e)]
    for i in range(1, e, 2):  # X pairs (2,3), (4,5), ..., (12,1) in 1-based labels
        j = (i + 1) % e
        main[i].add(j)
        main[j].add(i)
    regions = {}
    for k in range(0, e, 2):  # Y pairs (1,2), (3,4), ...
        l = k + 1
        secondary[k].add(l)
        secondary[l].add(k)
        regions[(k, l)] = cap.make_fixed_region(1.0, 1.0, pair_rate, pair_rate)
    return make_graph(rates, main, secondary, regions)


def fig7a_graph(
    rates=(10.0, 10.0, 10.0, 10.0),
    regions: dict | None = None,
) -> NetworkGraph:
    """Four edges, broadcast pairs (1,4) and (2,3); edges 1 and 3 are the
    only compatible point-to-point pair.

    Default regions are the fixed pairs (8,5) on (1,4) and (5,8) on (2,3);
    pass ``regions`` keyed by 0-based pairs to override (e.g. sampled
    boundaries for variable-rate experiments).
    """
    main = [{1}, {0, 3}, {3}, {1, 2}]
    secondary = [{3}, {2}, {1}, {0}]
    if regions is None:
        regions = {
            (0, 3): cap.make_fixed_region(rates[0], rates[3], 0.8 * rates[0], 0.5 * rates[3]),
            (1, 2): cap.make_fixed_region(rates[1], rates[2], 0.5 * rates[1], 0.8 * rates[2]),
        }
    return make_graph(rates, main, secondary, regions)


def fig5_graph(
    rates=(1.0, 1.0, 1.0, 1.0),
    regions: dict | None = None,
) -> NetworkGraph:
    """Four edges, broadcast pairs (1,4) and (2,3); both diagonals (1,3)
    and (2,4) are compatible point-to-point pairs."""
    main = [{1}, {0}, {3}, {2}]
    secondary = [{3}, {2}, {1}, {0}]
    if regions is None:
        regions = {
            (0, 3): _symmetric_sampled_region(rates[0], rates[3]),
            (1, 2): _symmetric_sampled_region(rates[1], rates[2]),
        }
    return make_graph(rates, main, secondary, regions)


def _symmetric_sampled_region(c_k: float, c_l: float) -> cap.SampledRegion:
    pts = [
        (0.0, c_l),
        (0.45 * c_k, 0.9 * c_l),
        (0.75 * c_k, 0.75 * c_l),
        (0.9 * c_k, 0.45 * c_l),
        (c_k, 0.0),
    ]
    return cap.make_sampled_region(pts)


FIG6A_TOPOLOGY = [
    (0, 1),  # 1: a1 -> a2
    (0, 2),  # 2: a1 -> a3    broadcast with 1
    (3, 4),  # 3: b1 -> b2
    (6, 7),  # 4: c1 -> c2
    (9, 10),  # 5: d1 -> d2
    (9, 11),  # 6: d1 -> d3   broadcast with 5
    (6, 8),  # 7: c1 -> c3    broadcast with 4
    (3, 5),  # 8: b1 -> b3    broadcast with 3
    (12, 13),  # 9: e1 -> e2
    (1, 3),  # 10: a2 -> b1
    (4, 6),  # 11: b2 -> c1
    (7, 9),  # 12: c2 -> d1
    (10, 0),  # 13: d2 -> a1
    (12, 14),  # 14: e1 -> e3  broadcast with 9
    (5, 15),  # 15: b3 -> f1
]

FIG6A_PAIRS = [(0, 1), (3, 6), (2, 7), (4, 5), (8, 13)]  # 0-based edge pairs

FIG6A_RATES = (10.0, 8.0, 12.0, 7.0, 9.0, 6.0, 5.0, 8.0, 6.0, 8.0, 4.0, 9.0, 3.0, 4.0, 5.0)

FIG6A_PAIR_RATES = {
    (0, 1): (9.0, 5.0),
    (3, 6): (5.5, 3.0),
    (2, 7): (10.0, 6.0),
    (4, 5): (7.0, 4.5),
    (8, 13): (4.0, 3.0),
}


def fig6a_graph() -> NetworkGraph:
    """Fifteen-edge multi-hop network with five broadcast links.

    The published rates cover edges 1, 2, 3, 8, 9, 14 and the pairs (1,2),
    (3,8), (9,14); the remaining capacities and pair rates are fixture
    choices within the stated ranges.
    """
    from .net_model import derive_node_exclusive_sets

    main, secondary = derive_node_exclusive_sets(FIG6A_TOPOLOGY, FIG6A_PAIRS)
    regions = {}
    for (k, l), (c_kl, c_lk) in FIG6A_PAIR_RATES.items():
        regions[(k, l)] = cap.make_fixed_region(
            FIG6A_RATES[k], FIG6A_RATES[l], c_kl, c_lk
        )
    return make_graph(FIG6A_RATES, main, secondary, regions, endpoints=FIG6A_TOPOLOGY)
