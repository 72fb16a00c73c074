"""Numeric geometry on the unit disk.

Everything here samples a series on the circles of a ``DiskGrid`` and turns
the samples into a three-valued ``Verdict``.  Borderline margins are reported
as INCONCLUSIVE instead of being forced to one side.

Subordination is decided by range containment: for a univalent dominant F,
g is subordinate to F on the 0.95-disk iff g(0) = F(0) and every sample of g
lies inside the Jordan curve F(0.95 e^{it}).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
import shapely
from scipy.spatial import cKDTree

from .errors import DegenerateDerivative, TooClose
from .series import AnalyticSeries, circle_values, differentiate, evaluate, max_coeff_diff

DECISION_TOL = 1e-6
WINDING_GUARD = 1e-4
DERIVATIVE_FLOOR = 1e-8
OUTER_RADIUS = 0.95
DEFAULT_RADII = (0.3, 0.5, 0.7, 0.85, 0.95)
DEFAULT_N = 1024

# dominant curves are sampled this many times denser than the grid
_OVERSAMPLE = 4
# candidate vertices examined when refining a point-to-curve distance
_NEIGHBOURS = 8
# self-approach distances beyond this are reported as this value
SELF_APPROACH_CAP = 0.05


@dataclass(frozen=True)
class DiskGrid:
    radii: tuple[float, ...] = DEFAULT_RADII
    n: int = DEFAULT_N

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        if not radii:
            raise ValueError("grid needs at least one radius")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValueError("grid radii must be strictly ascending")
        if radii[0] <= 0 or radii[-1] > OUTER_RADIUS:
            raise ValueError(f"grid radii must lie in (0, {OUTER_RADIUS}]")
        if self.n < 256:
            raise ValueError("angular count must be >= 256")
        object.__setattr__(self, "radii", radii)

    @property
    def outer(self) -> float:
        return self.radii[-1]

    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n) / self.n

    def points(self) -> np.ndarray:
        """All grid points, radius-major, shape (len(radii), n)."""
        e = np.exp(1j * self.angles())
        return np.array([r * e for r in self.radii])


class Status(enum.IntEnum):
    # ordering is the meet order: FAILS < INCONCLUSIVE < HOLDS
    FAILS = 0
    INCONCLUSIVE = 1
    HOLDS = 2

    @property
    def label(self) -> str:
        return {0: "Fails", 1: "Inconclusive", 2: "Holds"}[int(self)]


@dataclass(frozen=True)
class Witness:
    z: complex
    value: complex
    z2: Optional[complex] = None
    value2: Optional[complex] = None

    def to_dict(self) -> dict:
        out = {"z": _cpair(self.z), "value": _cpair(self.value)}
        if self.z2 is not None:
            out["z2"] = _cpair(self.z2)
            out["value2"] = _cpair(self.value2)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> Witness:
        z2 = d.get("z2")
        return cls(
            complex(*d["z"]),
            complex(*d["value"]),
            complex(*z2) if z2 is not None else None,
            complex(*d["value2"]) if z2 is not None else None,
        )


def _cpair(c: complex) -> list[float]:
    return [float(c.real), float(c.imag)]


@dataclass(frozen=True)
class Verdict:
    """Outcome of one numeric check.

    ``band`` is the half-width of the INCONCLUSIVE zone that produced the
    status: ``DECISION_TOL`` for real-part margins, the local curve guard for
    containment checks.
    """

    status: Status
    margin: float
    witness: Optional[Witness] = None
    band: float = DECISION_TOL
    note: str = ""

    def __post_init__(self):
        if self.status is Status.FAILS and self.witness is None:
            raise ValueError("a failing verdict needs a witness")

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    @property
    def fails(self) -> bool:
        return self.status is Status.FAILS

    @classmethod
    def from_margin(cls, margin: float, witness: Optional[Witness], band: float = DECISION_TOL, note: str = "") -> Verdict:
        if margin > band:
            return cls(Status.HOLDS, margin, witness, band, note)
        if margin < -band:
            return cls(Status.FAILS, margin, witness, band, note)
        return cls(Status.INCONCLUSIVE, margin, witness, band, note)

    def to_dict(self) -> dict:
        return {
            "status": self.status.label,
            "margin": float(self.margin),
            "band": float(self.band),
            "witness": self.witness.to_dict() if self.witness else None,
            "note": self.note,
        }


def meet(verdicts: Iterable[Verdict]) -> Verdict:
    """Worst status wins; ties keep the smaller margin."""
    worst = None
    for v in verdicts:
        if worst is None or (v.status, v.margin) < (worst.status, worst.margin):
            worst = v
    if worst is None:
        raise ValueError("meet of no verdicts")
    return worst


# --- real-part conditions ----------------------------------------------------


def grid_values(s: AnalyticSeries, grid: DiskGrid) -> np.ndarray:
    return np.array([circle_values(s, r, grid.n) for r in grid.radii])


def min_real_on_disk(s: AnalyticSeries, grid: DiskGrid) -> tuple[float, complex]:
    vals = grid_values(s, grid).real
    idx = np.unravel_index(int(np.argmin(vals)), vals.shape)
    z = grid.radii[idx[0]] * np.exp(2j * np.pi * idx[1] / grid.n)
    return float(vals[idx]), complex(z)


def real_part_verdict(s: AnalyticSeries, grid: DiskGrid, bound: float = 0.0, note: str = "") -> Verdict:
    """Verdict on Re s(z) > bound over the grid."""
    lo, z = min_real_on_disk(s, grid)
    return Verdict.from_margin(lo - bound, Witness(z, complex(evaluate(s, z))), note=note)


def nonvanishing_verdict(s: AnalyticSeries, grid: DiskGrid, note: str = "") -> Verdict:
    """s has no zero in the closed grid disk.

    The margin is min |s| over the grid circles and the centre; a zero
    enclosed by the outer circle is caught by the winding number about 0.
    """
    vals = grid_values(s, grid)
    mags = np.abs(vals)
    idx = np.unravel_index(int(np.argmin(mags)), mags.shape)
    z = complex(grid.radii[idx[0]] * np.exp(2j * np.pi * idx[1] / grid.n))
    margin, wz, wv = float(mags[idx]), z, complex(vals[idx])
    c0 = complex(s.coeffs[0])
    if abs(c0) < margin:
        margin, wz, wv = abs(c0), 0j, c0
    if margin > DECISION_TOL:
        zeros = _winding(vals[-1], 0j)
        if zeros != 0:
            return Verdict(Status.FAILS, -margin, Witness(wz, wv), note=f"{zeros} zero(s) inside |z| = {grid.outer}")
    return Verdict.from_margin(margin, Witness(wz, wv), note=note)


# --- winding numbers ---------------------------------------------------------


def _winding(curve: np.ndarray, w: complex) -> int:
    d = curve - w
    turn = np.angle(np.roll(d, -1) / d).sum()
    return int(round(turn / (2 * np.pi)))


def _segment_distances(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from each point to segment [a, b] (broadcasting)."""
    ab = b - a
    denom = np.abs(ab) ** 2
    t = np.where(denom > 0, ((points - a) * np.conj(ab)).real / np.where(denom > 0, denom, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.abs(points - (a + t * ab))


def winding_number(curve: Sequence[complex], w: complex, guard: float = WINDING_GUARD) -> int:
    """Turns of the closed polygon ``curve`` around ``w``.

    The closing edge from the last point back to the first is implied.
    """
    c = np.asarray(curve, dtype=np.complex128)
    w = complex(w)
    dist = _segment_distances(np.full(c.size, w), c, np.roll(c, -1)).min()
    if dist <= guard:
        raise TooClose(f"point {w!r} lies within {dist:.3e} of the curve")
    return _winding(c, w)


# --- univalence ---------------------------------------------------------------


def _ring(vals: np.ndarray) -> shapely.LinearRing:
    return shapely.LinearRing(np.column_stack([vals.real, vals.imag]))


def _crossing_pair(vals: np.ndarray) -> Optional[tuple[int, int]]:
    """Indices of two non-adjacent polygon edges that intersect, if any."""
    n = vals.size
    xy = np.column_stack([vals.real, vals.imag])
    segs = shapely.linestrings(np.stack([xy, np.roll(xy, -1, axis=0)], axis=1))
    tree = shapely.STRtree(segs)
    left, right = tree.query(segs, predicate="intersects")
    gap = np.abs(left - right)
    gap = np.minimum(gap, n - gap)
    keep = gap > 1
    if not np.any(keep):
        # coincident vertices (e.g. a curve traced twice) touch at shared points
        order = np.lexsort((xy[:, 1], xy[:, 0]))
        same = np.all(np.isclose(xy[order][1:], xy[order][:-1], rtol=0, atol=1e-12), axis=1)
        if np.any(same):
            k = int(np.argmax(same))
            return int(order[k]), int(order[k + 1])
        return None
    k = int(np.argmax(keep))
    return int(left[k]), int(right[k])


def _self_approach(vals: np.ndarray) -> tuple[float, Optional[tuple[int, int]]]:
    """Smallest chord between points that are far apart along the curve.

    Only pairs closer than 5% of the curve's diameter (and never farther than
    SELF_APPROACH_CAP) are examined; if none qualifies, that cap is returned.
    """
    xy = np.column_stack([vals.real, vals.imag])
    diam = float(np.ptp(vals.real) + np.ptp(vals.imag)) or 1.0
    cap = min(0.05 * diam, SELF_APPROACH_CAP)
    pairs = cKDTree(xy).query_pairs(cap, output_type="ndarray")
    if pairs.size == 0:
        return cap, None
    seg = np.abs(np.roll(vals, -1) - vals)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    i, j = pairs[:, 0], pairs[:, 1]
    arc = np.abs(cum[j] - cum[i])
    arc = np.minimum(arc, total - arc)
    chord = np.abs(vals[j] - vals[i])
    nonlocal_ = arc > 3.0 * chord + 1e-15
    if not np.any(nonlocal_):
        return cap, None
    k = int(np.argmin(np.where(nonlocal_, chord, np.inf)))
    return float(chord[k]), (int(i[k]), int(j[k]))


def univalence_probe(s: AnalyticSeries, grid: DiskGrid) -> Verdict:
    """Injectivity of s on the grid disk via its boundary images.

    On each circle the image must be a simple closed curve winding once
    around s(0); by the argument principle that forces univalence inside.
    """
    theta = grid.angles()
    center = complex(s.coeffs[0])
    margin = math.inf
    witness = None
    for r in grid.radii:
        vals = circle_values(s, r, grid.n)
        zs = r * np.exp(1j * theta)
        if not _ring(vals).is_simple:
            pair = _crossing_pair(vals)
            i, j = pair if pair is not None else (0, grid.n // 2)
            w = Witness(complex(zs[i]), complex(vals[i]), complex(zs[j]), complex(vals[j]))
            return Verdict(Status.FAILS, -abs(vals[i] - vals[j]), w, WINDING_GUARD, f"boundary image at r = {r} self-intersects")
        try:
            turns = winding_number(vals, center)
        except TooClose:
            w = Witness(complex(zs[0]), complex(vals[0]))
            return Verdict(Status.INCONCLUSIVE, 0.0, w, WINDING_GUARD, f"s(0) on the image of |z| = {r}")
        if turns != 1:
            w = Witness(complex(zs[0]), complex(vals[0]))
            return Verdict(Status.FAILS, -1.0, w, WINDING_GUARD, f"image of |z| = {r} winds {turns} times around s(0)")
        if r == grid.outer:
            # near-contacts are measured on the outermost image only
            margin, pair = _self_approach(vals)
            if pair is not None:
                i, j = pair
                witness = Witness(complex(zs[i]), complex(vals[i]), complex(zs[j]), complex(vals[j]))
    if margin <= WINDING_GUARD:
        return Verdict(Status.INCONCLUSIVE, margin, witness, WINDING_GUARD, "boundary image nearly touches itself")
    return Verdict(Status.HOLDS, margin, witness, WINDING_GUARD)


# --- starlike / convex ---------------------------------------------------------


def _vanishing_at_origin(s: AnalyticSeries) -> bool:
    scale = max(1.0, float(np.abs(s.coeffs).max()))
    return abs(s.coeffs[0]) <= 1e-13 * scale


def starlike_probe(s: AnalyticSeries, grid: DiskGrid) -> Verdict:
    """Re(z s'/s) > 0 on the grid, with s(0) = 0 required.

    The functional is evaluated as 1 + z t'/t where s = z t, which stays
    finite at the origin.
    """
    if not _vanishing_at_origin(s):
        c0 = complex(s.coeffs[0])
        return Verdict(Status.FAILS, -abs(c0), Witness(0j, c0), note="starlike functions vanish at the origin")
    t = AnalyticSeries(np.concatenate([s.coeffs[1:], [0.0]]), s.r_max)
    if abs(t.coeffs[0]) <= DERIVATIVE_FLOOR:
        return Verdict(Status.FAILS, -1.0, Witness(0j, 0j), note="s'(0) = 0: not univalent")
    tv = grid_values(t, grid)
    dt = grid_values(differentiate(t), grid)
    zs = grid.points()
    mags = np.abs(tv)
    if mags.min() <= DERIVATIVE_FLOOR:
        idx = np.unravel_index(int(np.argmin(mags)), mags.shape)
        return Verdict(Status.FAILS, -1.0, Witness(complex(zs[idx]), complex(zs[idx] * tv[idx])), note="s vanishes away from 0")
    func = 1.0 + zs * dt / tv
    idx = np.unravel_index(int(np.argmin(func.real)), func.shape)
    return Verdict.from_margin(float(func.real[idx]), Witness(complex(zs[idx]), complex(func[idx])))


def convex_probe(s: AnalyticSeries, grid: DiskGrid) -> Verdict:
    """Re(1 + z s''/s') > 0 on the grid."""
    d1 = differentiate(s)
    d2 = differentiate(d1)
    v1 = grid_values(d1, grid)
    zs = grid.points()
    mags = np.abs(v1)
    if abs(d1.coeffs[0]) < DERIVATIVE_FLOOR:
        raise DegenerateDerivative(abs(d1.coeffs[0]), 0j)
    if mags.min() < DERIVATIVE_FLOOR:
        idx = np.unravel_index(int(np.argmin(mags)), mags.shape)
        raise DegenerateDerivative(float(mags[idx]), complex(zs[idx]))
    func = 1.0 + zs * grid_values(d2, grid) / v1
    idx = np.unravel_index(int(np.argmin(func.real)), func.shape)
    return Verdict.from_margin(float(func.real[idx]), Witness(complex(zs[idx]), complex(func[idx])))


# --- subordination --------------------------------------------------------------


@dataclass
class DominantRegion:
    """The Jordan region bounded by F(R e^{it}) and its local error guards."""

    dominant: AnalyticSeries
    radius: float = OUTER_RADIUS
    n: int = DEFAULT_N
    guard: float = WINDING_GUARD
    vertices: np.ndarray = field(init=False, repr=False)
    seg_guard: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = _OVERSAMPLE * self.n
        self.vertices = circle_values(self.dominant, self.radius, m)
        arc_mid = circle_values(self.dominant, self.radius, 2 * m)[1::2]
        chord_mid = 0.5 * (self.vertices + np.roll(self.vertices, -1))
        # polygon-vs-curve gap on each edge, plus the fixed guard
        self.seg_guard = self.guard + np.abs(arc_mid - chord_mid)
        xy = np.column_stack([self.vertices.real, self.vertices.imag])
        self._polygon = shapely.Polygon(xy)
        shapely.prepare(self._polygon)
        # split long edges so the nearest-vertex search radius stays small;
        # the polygon itself is unchanged
        seg_len = np.abs(np.roll(self.vertices, -1) - self.vertices)
        step = 4.0 * float(np.median(seg_len)) or 1.0
        pieces = np.maximum(1, np.ceil(seg_len / step).astype(int))
        start = np.repeat(self.vertices, pieces)
        end = np.repeat(np.roll(self.vertices, -1), pieces)
        offset = np.arange(pieces.sum()) - np.repeat(np.cumsum(pieces) - pieces, pieces)
        frac = offset / np.repeat(pieces, pieces)
        self._dense = start + frac * (end - start)
        self._dense_guard = np.repeat(self.seg_guard, pieces)
        self._tree = cKDTree(np.column_stack([self._dense.real, self._dense.imag]))
        dense_len = np.abs(np.roll(self._dense, -1) - self._dense)
        self._search = float(self._dense_guard.max() + dense_len.max())

    def inside(self, w: np.ndarray) -> np.ndarray:
        return shapely.contains_xy(self._polygon, w.real, w.imag)

    def near(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Exact polygon distance and guard for points close to the boundary.

        Returns (indices into w, distances, guards) for points whose nearest
        vertex lies within the search radius.
        """
        xy = np.column_stack([w.real, w.imag])
        d1, _ = self._tree.query(xy, k=1, distance_upper_bound=self._search)
        cand = np.nonzero(np.isfinite(d1))[0]
        if cand.size == 0:
            return cand, np.empty(0), np.empty(0)
        dense = self._dense
        m = dense.size
        k = min(_NEIGHBOURS, m)
        _, idx = self._tree.query(xy[cand], k=k)
        idx = idx.reshape(cand.size, k)
        segs = np.concatenate([idx, (idx - 1) % m], axis=1)
        a = dense[segs]
        b = dense[(segs + 1) % m]
        dist = _segment_distances(w[cand][:, None], a, b)
        best = np.argmin(dist, axis=1)
        rows = np.arange(cand.size)
        return cand, dist[rows, best], self._dense_guard[segs[rows, best]]

    def min_distance(self, w: np.ndarray) -> float:
        """Upper estimate of the smallest point-to-curve distance."""
        v = self.vertices[::_OVERSAMPLE]
        d, _ = cKDTree(np.column_stack([w.real, w.imag])).query(np.column_stack([v.real, v.imag]))
        return float(d.min())

    def contains_point(self, w: complex) -> bool:
        return bool(winding_number(self.vertices, w, guard=0.0) != 0)


def containment(samples: np.ndarray, zs: np.ndarray, region: DominantRegion, note: str = "") -> Verdict:
    """Verdict on every sample lying inside the region, away from its boundary."""
    w = samples.reshape(-1)
    z = zs.reshape(-1)
    inside = region.inside(w)
    cand, dist, guard = region.near(w)
    signed = np.where(inside[cand], dist, -dist)
    blurry = np.zeros(w.size, dtype=bool)
    blurry[cand[dist <= guard]] = True
    clear_out = ~inside & ~blurry
    if np.any(clear_out):
        out_idx = np.nonzero(clear_out)[0]
        far, _ = region._tree.query(np.column_stack([w[out_idx].real, w[out_idx].imag]))
        k = int(np.argmax(far))
        j = int(out_idx[k])
        return Verdict(Status.FAILS, -float(far[k]), Witness(complex(z[j]), complex(w[j])), float(region.guard), note or "sample outside dominant image")
    if np.any(blurry):
        pos = np.nonzero(dist <= guard)[0]
        k = int(pos[np.argmin(np.abs(signed[pos]))])
        j = int(cand[k])
        return Verdict(Status.INCONCLUSIVE, float(signed[k]), Witness(complex(z[j]), complex(w[j])), float(guard[k]), note or "sample within guard of dominant boundary")
    # the image of a closed disk is bounded by the image of its rim, so the
    # outermost row of samples carries the smallest distance to the boundary
    rim = samples[-1] if samples.ndim == 2 else w
    margin = region.min_distance(rim.reshape(-1))
    if cand.size:
        margin = min(margin, float(dist.min()))
    j = int(np.argmin(np.abs(w - region.vertices[0]))) if w.size else 0
    return Verdict(Status.HOLDS, margin, Witness(complex(z[j]), complex(w[j])), float(region.guard), note)


def _is_constant(s: AnalyticSeries) -> bool:
    scale = max(1.0, abs(complex(s.coeffs[0])))
    return bool(np.all(np.abs(s.coeffs[1:]) <= 1e-14 * scale))


def subordination_probe(g: AnalyticSeries, f: AnalyticSeries, grid: DiskGrid, region: Optional[DominantRegion] = None) -> Verdict:
    """g subordinate to the univalent f on the grid disk (range containment).

    The caller is responsible for checking that f is univalent; the
    equivalence with range containment depends on it.
    """
    g0, f0 = complex(g.coeffs[0]), complex(f.coeffs[0])
    if abs(g0 - f0) > DECISION_TOL:
        return Verdict(Status.FAILS, -abs(g0 - f0), Witness(0j, g0), note="g(0) != f(0)")
    if max_coeff_diff(g, f) <= 1e-14 * max(1.0, float(np.max(np.abs(f.coeffs)))):
        # g = f is subordinate through w(z) = z; its rim lies on the boundary curve
        return Verdict(Status.HOLDS, 1.0, Witness(0j, f0), note="identical series")
    if _is_constant(f):
        # a constant dominant only admits the same constant
        vals = grid_values(g, grid)
        dev = np.abs(vals - f0)
        k = np.unravel_index(int(np.argmax(dev)), dev.shape)
        w = Witness(complex(grid.points()[k]), complex(vals[k]))
        if dev[k] <= DECISION_TOL:
            return Verdict(Status.HOLDS, 1.0, w, note="identical constants")
        return Verdict(Status.FAILS, -float(dev[k]), w, note="constant dominant, non-constant subordinate")
    if region is None:
        region = DominantRegion(f, grid.outer, grid.n)
    return containment(grid_values(g, grid), grid.points(), region)


def reverify_outside(f: AnalyticSeries, witness: Witness, grid: DiskGrid, value: Optional[complex] = None) -> bool:
    """Independent recheck of a containment failure: winding of f's outer curve is 0."""
    if witness.z == 0 and witness.z2 is None and abs(witness.value - complex(f.coeffs[0])) > DECISION_TOL:
        return True
    curve = circle_values(f, grid.outer, _OVERSAMPLE * grid.n)
    w = witness.value if value is None else value
    try:
        return winding_number(curve, w) == 0
    except TooClose:
        return False
