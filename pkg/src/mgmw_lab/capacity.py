"""Multiuser-link rate regions and weight-maximisation queries.

Three region kinds are supported:

* ``Fixed`` -- a single operating pair (c_kl, c_lk) strictly above the
  time-sharing line, used by the fixed-rate scheduler.
* ``GaussianBC`` -- degraded Gaussian broadcast parametrised by the power
  split alpha in [0, 1]; strictly convex and smooth.
* ``SampledBoundary`` -- an explicit strictly concave polyline of boundary
  points, handy when tests need exact rational boundaries.

All regions expose the two corner rates ``c_k`` and ``c_l`` (the
point-to-point capacities of the two member edges).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NotStrictlyConvexPoint, UndefinedWeight

_GOLDEN_TOL = 1e-9  # absolute tolerance on the boundary parameter


@dataclass(frozen=True)
class RatePair:
    """One operating point (rate of edge k, rate of edge l) in packets/slot."""

    r_k: float
    r_l: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.r_k, self.r_l)


@dataclass(frozen=True)
class FixedRegion:
    """Rate region reduced to one boundary point plus the two corners."""

    c_k: float
    c_l: float
    c_kl: float
    c_lk: float

    kind = "fixed"

    def boundary_point(self, t: float) -> tuple[float, float]:
        # piecewise corner -> fixed point -> corner
        if t <= 0.5:
            s = t / 0.5
            return (self.c_k + s * (self.c_kl - self.c_k), s * self.c_lk)
        s = (t - 0.5) / 0.5
        return (self.c_kl * (1 - s), self.c_lk + s * (self.c_l - self.c_lk))


@dataclass(frozen=True)
class GaussianBCRegion:
    """Two-user degraded Gaussian broadcast region.

    The boundary point at power split ``alpha`` is

        r_k(alpha) = 0.5*log2(1 + alpha*P/N_k)
        r_l(alpha) = 0.5*log2(1 + (1-alpha)*P/(alpha*P + N_l))

    so alpha=1 gives the corner (c_k, 0) and alpha=0 gives (0, c_l).
    """

    power: float
    noise_k: float
    noise_l: float

    kind = "gaussian_bc"

    @property
    def c_k(self) -> float:
        return 0.5 * math.log2(1.0 + self.power / self.noise_k)

    @property
    def c_l(self) -> float:
        return 0.5 * math.log2(1.0 + self.power / self.noise_l)

    def boundary_point(self, alpha: float) -> tuple[float, float]:
        a = min(1.0, max(0.0, alpha))
        r_k = 0.5 * math.log2(1.0 + a * self.power / self.noise_k)
        r_l = 0.5 * math.log2(1.0 + (1.0 - a) * self.power / (a * self.power + self.noise_l))
        return (r_k, r_l)


@dataclass(frozen=True)
class SampledRegion:
    """Region given by an explicit list of boundary points.

    ``points`` must be strictly decreasing in r_l as r_k grows, strictly
    concave, start at the corner (c_k, 0)... stored here sorted by r_k
    ascending, i.e. from (0, c_l) to (c_k, 0).
    """

    points: tuple[tuple[float, float], ...]

    kind = "sampled"

    @property
    def c_k(self) -> float:
        return self.points[-1][0]

    @property
    def c_l(self) -> float:
        return self.points[0][1]

    def boundary_point(self, t: float) -> tuple[float, float]:
        # linear interpolation along the polyline, parameter-uniform in
        # index space so nested sample counts reuse the stored vertices
        pos = min(1.0, max(0.0, t)) * (len(self.points) - 1)
        i = int(math.floor(pos))
        if i >= len(self.points) - 1:
            return self.points[-1]
        frac = pos - i
        (x0, y0), (x1, y1) = self.points[i], self.points[i + 1]
        return (x0 + frac * (x1 - x0), y0 + frac * (y1 - y0))


CapacityRegion = FixedRegion | GaussianBCRegion | SampledRegion


def make_fixed_region(c_k: float, c_l: float, c_kl: float, c_lk: float) -> FixedRegion:
    """Build a fixed region, rejecting pairs dominated by time sharing."""
    if min(c_k, c_l, c_kl, c_lk) <= 0:
        raise NotStrictlyConvexPoint("all rates must be positive")
    if not (c_kl < c_k and c_lk < c_l):
        raise NotStrictlyConvexPoint(
            f"fixed pair ({c_kl}, {c_lk}) must lie strictly below the corners ({c_k}, {c_l})"
        )
    if not c_kl / c_k + c_lk / c_l > 1.0:
        raise NotStrictlyConvexPoint(
            f"fixed pair ({c_kl}, {c_lk}) does not dominate time sharing for corners ({c_k}, {c_l})"
        )
    return FixedRegion(c_k, c_l, c_kl, c_lk)


def make_sampled_region(points) -> SampledRegion:
    """Build a sampled region from boundary points (any order), validating shape."""
    pts = sorted((float(x), float(y)) for x, y in points)
    if len(pts) < 3:
        raise NotStrictlyConvexPoint("sampled boundary needs at least 3 points")
    c_k = pts[-1][0]
    c_l = pts[0][1]
    if pts[0][0] != 0.0 or pts[-1][1] != 0.0:
        raise NotStrictlyConvexPoint("sampled boundary must include both corners")
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if not (x1 > x0 and y1 < y0):
            raise NotStrictlyConvexPoint("boundary points must be strictly monotone")
    # strict concavity: slopes strictly decreasing
    slopes = [(y1 - y0) / (x1 - x0) for (x0, y0), (x1, y1) in zip(pts, pts[1:])]
    for s0, s1 in zip(slopes, slopes[1:]):
        if not s1 < s0 - 1e-15:
            raise NotStrictlyConvexPoint("boundary points must be strictly concave")
    for x, y in pts[1:-1]:
        if not x / c_k + y / c_l > 1.0:
            raise NotStrictlyConvexPoint(
                f"interior point ({x}, {y}) does not strictly dominate time sharing"
            )
    return SampledRegion(tuple(pts))


def corner_rates(region: CapacityRegion) -> tuple[float, float]:
    return (region.c_k, region.c_l)


def fixed_pair(region: FixedRegion) -> RatePair:
    return RatePair(region.c_kl, region.c_lk)


def max_weight_point(region: CapacityRegion, q_k: float, q_l: float) -> tuple[RatePair, float]:
    """Return the boundary point maximising q_k*r_k + q_l*r_l, with its weight.

    Corners are always candidates.  For a Fixed region only the fixed pair
    and the two corners compete; for a strictly convex boundary the argmax
    is unique and found by golden-section search on the boundary parameter.
    """
    if q_k < 0 or q_l < 0:
        raise UndefinedWeight("queue lengths must be nonnegative")
    if q_k == 0 and q_l == 0:
        raise UndefinedWeight("weight is undefined for an all-zero queue pair")

    def w(point: tuple[float, float]) -> float:
        return q_k * point[0] + q_l * point[1]

    if isinstance(region, FixedRegion):
        candidates = [(region.c_kl, region.c_lk), (region.c_k, 0.0), (0.0, region.c_l)]
        best = max(candidates, key=w)
        return RatePair(*best), w(best)

    if isinstance(region, SampledRegion):
        best = max(region.points, key=w)
        return RatePair(*best), w(best)

    # smooth strictly convex boundary: the weight along alpha is unimodal
    lo, hi = 0.0, 1.0
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a = hi - inv_phi * (hi - lo)
    b = lo + inv_phi * (hi - lo)
    fa = w(region.boundary_point(a))
    fb = w(region.boundary_point(b))
    while hi - lo > _GOLDEN_TOL:
        if fa < fb:
            lo = a
            a, fa = b, fb
            b = lo + inv_phi * (hi - lo)
            fb = w(region.boundary_point(b))
        else:
            hi = b
            b, fb = a, fa
            a = hi - inv_phi * (hi - lo)
            fa = w(region.boundary_point(a))
    alpha = 0.5 * (lo + hi)
    candidates = [region.boundary_point(alpha), (region.c_k, 0.0), (0.0, region.c_l)]
    best = max(candidates, key=w)
    return RatePair(*best), w(best)


def on_boundary(region: CapacityRegion, r_k: float, r_l: float, tol: float = 1e-9) -> bool:
    """True iff (r_k, r_l) lies on the region boundary (within tol)."""
    if isinstance(region, FixedRegion):
        for p in ((region.c_kl, region.c_lk), (region.c_k, 0.0), (0.0, region.c_l)):
            if abs(r_k - p[0]) <= tol and abs(r_l - p[1]) <= tol:
                return True
        return False
    if isinstance(region, SampledRegion):
        pts = region.points
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if x0 - tol <= r_k <= x1 + tol and abs(x1 - x0) > 1e-15:
                y = y0 + (r_k - x0) * (y1 - y0) / (x1 - x0)
                if abs(y - r_l) <= tol:
                    return True
        return False
    # GaussianBC: invert r_k for the power split, compare r_l
    a = (2.0 ** (2.0 * r_k) - 1.0) * region.noise_k / region.power
    if not -tol <= a <= 1.0 + tol:
        return False
    _, y = region.boundary_point(min(1.0, max(0.0, a)))
    return abs(y - r_l) <= tol


def sample_boundary(region: CapacityRegion, n: int) -> list[RatePair]:
    """Return n boundary points including both corners, ordered by r_k.

    A Fixed region always yields exactly its three operating points.  For
    polyline regions the parameterisation is index-uniform, so the grids
    for n and 2n-1 are nested.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    if isinstance(region, FixedRegion):
        return [
            RatePair(0.0, region.c_l),
            RatePair(region.c_kl, region.c_lk),
            RatePair(region.c_k, 0.0),
        ]
    if isinstance(region, SampledRegion):
        pts = [region.boundary_point(i / (n - 1)) for i in range(n)]
    else:
        # GaussianBC: alpha=0 is the (0, c_l) corner
        pts = [region.boundary_point(i / (n - 1)) for i in range(n)]
    pts.sort(key=lambda p: p[0])
    return [RatePair(x, y) for x, y in pts]
