"""Geometric checks that do not rely on any univalence criterion.

These tests look at sampled images directly: near-collisions between far
apart preimages, self-intersections of the image of a circle, crossing
counts along parallel lines, and the sign of the Jacobian.  A passing
injectivity or simplicity test is evidence, not a proof; a failure comes
with an explicit witness.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from functools import cmp_to_key

import numpy as np
from scipy.stats import qmc

from .criteria import CERTIFIED, INCONCLUSIVE, VIOLATED, CheckReport, DiskGrid
from .funcore import AnalyticFn

__all__ = [
    "BoundaryResult",
    "CollisionWitness",
    "CompareReport",
    "ConvexityResult",
    "DegenerateBoundaryError",
    "InjectivityResult",
    "NonSimpleBoundaryError",
    "PointMap",
    "boundary_simplicity",
    "closed_form_compare",
    "convex_in_direction_test",
    "crossing_counts",
    "disk_samples",
    "injectivity_test",
    "segments_intersect",
    "sense_preserving_scan",
]

NO_COLLISION = "no collision found"
COLLISION = "collision"


class DegenerateBoundaryError(ValueError):
    """The image polyline has a zero-length segment."""


class NonSimpleBoundaryError(ValueError):
    """A crossing count was requested on a self-intersecting boundary."""


def disk_samples(n: int, radius: float, seed: int = 0) -> np.ndarray:
    """Scrambled Halton points, area-uniform in the disk of ``radius``."""
    u = qmc.Halton(d=2, scramble=True, seed=seed).random(n)
    return radius * np.sqrt(u[:, 0]) * np.exp(2j * np.pi * u[:, 1])


def _values(mapping, z):
    return np.asarray(mapping(np.asarray(z, dtype=complex)), dtype=complex)


def _wirtinger(mapping, z):
    if isinstance(mapping, AnalyticFn):
        d = mapping.derivative()(z)
        return np.asarray(d), np.zeros_like(d)
    fz, fzb = mapping.wirtinger(z)
    return np.asarray(fz), np.asarray(fzb)


@dataclass
class PointMap:
    """A mapping together with the sample sets used to test it."""

    mapping: object
    r_test: float = 0.995
    n_boundary: int = 4096
    n_interior: int = 20000
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.r_test < 1):
            raise ValueError("r_test must lie in (0, 1)")

    def interior(self) -> np.ndarray:
        return disk_samples(self.n_interior, self.r_test, self.seed)

    def boundary(self) -> np.ndarray:
        return self.r_test * np.exp(2j * np.pi * np.arange(self.n_boundary) / self.n_boundary)

    def __call__(self, z):
        return _values(self.mapping, z)


@dataclass(frozen=True)
class CollisionWitness:
    z1: complex
    z2: complex
    image_distance: float
    preimage_distance: float

    def as_dict(self):
        return {
            "z1": [self.z1.real, self.z1.imag],
            "z2": [self.z2.real, self.z2.imag],
            "image_distance": self.image_distance,
            "preimage_distance": self.preimage_distance,
        }


@dataclass
class InjectivityResult:
    verdict: str
    witness: CollisionWitness | None
    n_samples: int
    candidates: int
    notes: list = field(default_factory=list)

    @property
    def collision(self) -> bool:
        return self.witness is not None

    def as_dict(self):
        return {
            "verdict": self.verdict,
            "witness": None if self.witness is None else self.witness.as_dict(),
            "n_samples": self.n_samples,
            "candidates": self.candidates,
            "notes": list(self.notes),
        }


CELL_CAPACITY = 48
MAX_HASH_DEPTH = 12


def _near_pairs(pts: np.ndarray, images: np.ndarray, cell: float, separation: float,
                subset=None, depth: int = 0):
    """Pairs of samples whose images share or neighbour a hash cell while
    their preimages are at least ``separation`` apart.

    Cells holding more than ``CELL_CAPACITY`` samples are re-hashed, together
    with their neighbours, at a quarter of the cell size, so regions where
    the mapping squeezes many samples together stay affordable.
    """
    idx = np.arange(pts.size) if subset is None else subset
    ix = np.floor(images[idx].real / cell).astype(np.int64)
    iy = np.floor(images[idx].imag / cell).astype(np.int64)
    buckets: dict = {}
    for k, key in zip(idx.tolist(), zip(ix.tolist(), iy.tolist())):
        buckets.setdefault(key, []).append(k)
    crowded = {key for key, members in buckets.items() if len(members) > CELL_CAPACITY}
    offsets = ((0, 0), (1, 0), (0, 1), (1, 1), (1, -1))
    first, second = [], []
    for (cx, cy), members in buckets.items():
        if (cx, cy) in crowded and depth >= MAX_HASH_DEPTH:
            members = members[:: max(1, len(members) // CELL_CAPACITY)]
        elif (cx, cy) in crowded:
            continue
        a = np.array(members)
        for dx, dy in offsets:
            key = (cx + dx, cy + dy)
            other = buckets.get(key)
            if other is None or (key in crowded and depth < MAX_HASH_DEPTH):
                continue
            b = np.array(other)
            if dx == 0 and dy == 0:
                i, j = np.triu_indices(a.size, k=1)
                pa, pb = a[i], a[j]
            else:
                pa = np.repeat(a, b.size)
                pb = np.tile(b, a.size)
            keep = np.abs(pts[pa] - pts[pb]) > separation
            first.append(pa[keep])
            second.append(pb[keep])
    if crowded and depth < MAX_HASH_DEPTH:
        around = set()
        for cx, cy in crowded:
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    around.update(buckets.get((cx + dx, cy + dy), ()))
        pa, pb = _near_pairs(pts, images, cell / 4, separation,
                             np.array(sorted(around)), depth + 1)
        first.append(pa)
        second.append(pb)
    if not first:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    pa, pb = np.concatenate(first), np.concatenate(second)
    if depth == 0 and pa.size:
        # the same pair can surface at several hash levels
        lo, hi = np.minimum(pa, pb), np.maximum(pa, pb)
        _, keep = np.unique(lo * pts.size + hi, return_index=True)
        pa, pb = lo[keep], hi[keep]
    return pa, pb


def _refine_pair(f, z1: complex, z2: complex, r_max: float, tol: float, iters: int = 60):
    """Damped Gauss-Newton on ``|f(z1) - f(z2)|^2`` over ``(z1, z2)``.

    The system has two residuals and four unknowns, so each step is the
    minimum-norm least-squares step.
    """
    def residual(a, b):
        v = _values(f, np.array([a, b]))
        return v[0] - v[1]

    res = residual(z1, z2)
    for _ in range(iters):
        if abs(res) < 0.01 * tol:
            break
        fz, fzb = _wirtinger(f, np.array([z1, z2]))
        dx = fz + fzb
        dy = 1j * (fz - fzb)
        cols = np.array([dx[0], dy[0], -dx[1], -dy[1]])
        jac = np.vstack([cols.real, cols.imag])
        step = np.linalg.lstsq(jac, -np.array([res.real, res.imag]), rcond=None)[0]
        damping = 1.0
        improved = False
        while damping > 1e-6:
            a = z1 + damping * complex(step[0], step[1])
            b = z2 + damping * complex(step[2], step[3])
            if abs(a) <= r_max and abs(b) <= r_max:
                trial = residual(a, b)
                if np.isfinite(trial) and abs(trial) < abs(res):
                    z1, z2, res = a, b, trial
                    improved = True
                    break
            damping /= 2
        if not improved:
            break
    return z1, z2, abs(res)


def injectivity_test(m: PointMap, separation: float = 0.05, collision_tol: float = 1e-8,
                     max_candidates: int = 64) -> InjectivityResult:
    """Look for two far-apart samples with (nearly) the same image and
    sharpen the best candidates into an exact collision."""
    pts = np.concatenate([m.interior(), m.boundary()])
    images = m(pts)
    ok = np.isfinite(images)
    failed = int((~ok).sum())
    if failed > 0.01 * pts.size:
        raise ArithmeticError(f"mapping failed at {failed} of {pts.size} samples")
    pts, images = pts[ok], images[ok]
    notes = [f"{failed} samples dropped after evaluation failures"] if failed else []

    span = max(np.ptp(images.real), np.ptp(images.imag), 1e-300)
    cell = 2.0 * span / math.sqrt(pts.size)
    first, second = _near_pairs(pts, images, cell, separation)
    if first.size == 0:
        return InjectivityResult(NO_COLLISION, None, pts.size, 0, notes + ["not a proof of univalence"])

    # rank by image distance relative to the local length scale
    fz, fzb = _wirtinger(m.mapping, pts)
    stretch = np.abs(fz) + np.abs(fzb)
    gap = np.abs(images[first] - images[second])
    score = gap / np.maximum(stretch[first] + stretch[second], 1e-300)
    order = np.argsort(score, kind="stable")
    tried = 0
    seen = []
    for idx in order:
        if tried >= max_candidates:
            break
        a, b = complex(pts[first[idx]]), complex(pts[second[idx]])
        if any(abs(a - p) < separation / 4 and abs(b - q) < separation / 4 for p, q in seen):
            continue
        seen.append((a, b))
        tried += 1
        z1, z2, dist = _refine_pair(m.mapping, a, b, m.r_test, collision_tol)
        if dist < collision_tol and abs(z1 - z2) > separation:
            w = CollisionWitness(complex(z1), complex(z2), float(dist), float(abs(z1 - z2)))
            return InjectivityResult(COLLISION, w, pts.size, tried, notes)
    return InjectivityResult(NO_COLLISION, None, pts.size, tried, notes + ["not a proof of univalence"])


# boundary polylines -------------------------------------------------------------

def _orient(p, q, r):
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _on_segment(p, q, r):
    return min(p[0], q[0]) <= r[0] <= max(p[0], q[0]) and min(p[1], q[1]) <= r[1] <= max(p[1], q[1])


def segments_intersect(p1, p2, q1, q2) -> bool:
    """Closed-segment intersection test by orientation signs."""
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    if d1 == 0 and _on_segment(q1, q2, p1):
        return True
    if d2 == 0 and _on_segment(q1, q2, p2):
        return True
    if d3 == 0 and _on_segment(p1, p2, q1):
        return True
    if d4 == 0 and _on_segment(p1, p2, q2):
        return True
    return False


@dataclass
class BoundaryResult:
    simple: bool
    pair: tuple | None = None
    n_segments: int = 0

    @property
    def verdict(self) -> str:
        return "simple" if self.simple else "self-intersecting"

    def as_dict(self):
        return {"verdict": self.verdict, "pair": None if self.pair is None else list(self.pair),
                "n_segments": self.n_segments}


def _first_crossing(xy: np.ndarray):
    """Shamos-Hoey sweep over the closed polyline ``xy`` (shape ``(n, 2)``).

    Returns the indices of an intersecting pair of non-adjacent segments,
    or None.  Segment ``i`` joins vertex ``i`` to vertex ``i + 1 (mod n)``.
    """
    n = len(xy)
    pts = [tuple(map(float, p)) for p in xy]
    segs = []
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        segs.append((a, b) if a <= b else (b, a))

    def adjacent(i, j):
        d = abs(i - j)
        return d == 1 or d == n - 1

    sweep = [0.0]

    def y_at(i):
        (x1, y1), (x2, y2) = segs[i]
        if x1 == x2:
            return y1
        x = sweep[0]
        return y1 + (y2 - y1) * (x - x1) / (x2 - x1)

    def compare(i, j):
        yi, yj = y_at(i), y_at(j)
        if yi != yj:
            return -1 if yi < yj else 1
        # tie at the sweep position: order by slope, then index
        si = _slope(segs[i])
        sj = _slope(segs[j])
        if si != sj:
            return -1 if si < sj else 1
        return (i > j) - (i < j)

    key = cmp_to_key(compare)

    def check(i, j):
        if i is None or j is None or adjacent(i, j):
            return None
        (p1, p2), (q1, q2) = segs[i], segs[j]
        return (min(i, j), max(i, j)) if segments_intersect(p1, p2, q1, q2) else None

    events = []
    for i, (a, b) in enumerate(segs):
        events.append((a[0], 0, a[1], i))
        events.append((b[0], 1, b[1], i))
    events.sort()
    status: list = []
    keys: list = []
    for x, kind, _, i in events:
        sweep[0] = x
        if kind == 0:
            k = key(i)
            pos = bisect.bisect_left(keys, k)
            status.insert(pos, i)
            keys.insert(pos, k)
            below = status[pos - 1] if pos > 0 else None
            above = status[pos + 1] if pos + 1 < len(status) else None
            hit = check(i, below) or check(i, above)
            if hit:
                return hit
        else:
            pos = status.index(i)
            below = status[pos - 1] if pos > 0 else None
            above = status[pos + 1] if pos + 1 < len(status) else None
            del status[pos]
            del keys[pos]
            hit = check(below, above)
            if hit:
                return hit
    return None


def _slope(seg):
    (x1, y1), (x2, y2) = seg
    return math.inf if x1 == x2 else (y2 - y1) / (x2 - x1)


def boundary_simplicity(m: PointMap) -> BoundaryResult:
    """Decide whether the image of the circle of radius ``r_test`` (as a
    closed polyline through ``n_boundary`` samples) is simple."""
    if m.n_boundary < 64:
        raise ValueError("n_boundary must be at least 64")
    w = m(m.boundary())
    if not np.all(np.isfinite(w)):
        raise ArithmeticError("mapping failed on the boundary circle")
    lengths = np.abs(np.diff(np.append(w, w[0])))
    if np.any(lengths == 0):
        raise DegenerateBoundaryError("image polyline has a zero-length segment")
    xy = np.column_stack([w.real, w.imag])
    pair = _first_crossing(xy)
    return BoundaryResult(pair is None, pair, len(w))


# crossings along parallel lines -------------------------------------------------------

@dataclass
class ConvexityResult:
    convex: bool
    direction: float
    max_crossings: int
    worst_level: float | None
    skipped_levels: list
    counts: list

    @property
    def verdict(self) -> str:
        return "convex in direction" if self.convex else "not convex in direction"

    def as_dict(self):
        return {
            "verdict": self.verdict,
            "direction": self.direction,
            "max_crossings": self.max_crossings,
            "worst_level": self.worst_level,
            "skipped_levels": len(self.skipped_levels),
        }


def crossing_counts(w: np.ndarray, levels: np.ndarray, band: float):
    """Transversal crossings of the closed polyline ``w`` with the lines
    ``Im = level``.  Levels passing within ``band`` of a vertex are marked
    as tangency-ambiguous and returned separately."""
    y = w.imag
    y_next = np.roll(y, -1)
    counts = []
    skipped = []
    for lv in levels:
        if np.any(np.abs(y - lv) <= band):
            skipped.append(float(lv))
            counts.append(-1)
            continue
        counts.append(int(np.count_nonzero((y - lv) * (y_next - lv) < 0)))
    return counts, skipped


def convex_in_direction_test(m: PointMap, direction: float = 0.0, n_levels: int = 256,
                             band: float = 1e-6, require_simple: bool = True) -> ConvexityResult:
    """Count crossings of the image boundary with lines parallel to
    ``e^{i direction}``; the image is convex in that direction when no line
    crosses more than twice."""
    if require_simple:
        simple = boundary_simplicity(m)
        if not simple.simple:
            raise NonSimpleBoundaryError(f"boundary polyline self-intersects at segments {simple.pair}")
    w = m(m.boundary()) * np.exp(-1j * direction)
    lo, hi = float(w.imag.min()), float(w.imag.max())
    extent = hi - lo
    levels = lo + extent * (np.arange(n_levels) + 0.5) / n_levels
    counts, skipped = crossing_counts(w, levels, band * max(extent, 1.0))
    valid = [(c, lv) for c, lv in zip(counts, levels) if c >= 0]
    worst = max(valid, default=(0, None))
    return ConvexityResult(worst[0] <= 2, float(direction), int(worst[0]),
                           None if worst[1] is None else float(worst[1]), skipped, counts)


# scans and comparisons ---------------------------------------------------------------------

def sense_preserving_scan(s, grid: DiskGrid | None = None, slack: float | None = None) -> CheckReport:
    """Grid minimum of the Jacobian and supremum of ``|omega|``.

    Certified when ``sup |omega|`` stays below ``1 - slack``; the default
    slack is twice the unsampled rim ``1 - r_max``, so a dilatation that
    approaches 1 at the edge of the grid is reported as inconclusive.
    Any sampled ``|omega| >= 1`` is a violation.
    """
    grid = grid or DiskGrid()
    slack = 2 * (1 - grid.r_max) if slack is None else slack
    pts = grid.points()
    mod = np.abs(np.asarray(s.omega(pts)))
    jac = np.asarray(s.jacobian(pts))
    k = int(np.argmax(np.where(np.isfinite(mod), mod, np.inf)))
    j = int(np.argmin(np.where(np.isfinite(jac), jac, -np.inf)))
    sup = float(mod[k])
    if sup >= 1:
        verdict = VIOLATED
    elif sup < 1 - slack:
        verdict = CERTIFIED
    else:
        verdict = INCONCLUSIVE
    witnesses = [(complex(pts[k]), sup)] if verdict == VIOLATED else []
    return CheckReport(
        "sense", {"slack": slack}, sup, complex(pts[k]), 1.0, verdict, witnesses,
        [f"min Jacobian {float(jac[j]):.6g} at {complex(pts[j])}", f"jacobian_min={float(jac[j])!r}"],
    )


@dataclass
class CompareReport:
    max_error: float
    argmax: complex
    n: int

    def as_dict(self):
        return {"max_error": self.max_error, "argmax": [self.argmax.real, self.argmax.imag], "n": self.n}


def closed_form_compare(numeric, closed, n: int = 100, radius: float = 0.95, seed: int = 0) -> CompareReport:
    """Largest ``|numeric - closed|`` over ``n`` quasi-random points of the
    disk of ``radius``."""
    z = disk_samples(n, radius, seed)
    err = np.abs(_values(numeric, z) - _values(closed, z))
    if not np.all(np.isfinite(err)):
        raise ArithmeticError("evaluation failed during comparison")
    k = int(np.argmax(err))
    return CompareReport(float(err[k]), complex(z[k]), n)
