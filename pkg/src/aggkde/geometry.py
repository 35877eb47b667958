"""Planar region systems and evaluation grids.

Coordinates are planar map units (projected CRS); no geodesic math is done
anywhere. A point is any ``(x, y)`` pair; collections of points are
``(n, 2)`` float arrays. Region geometries are polygons or multipolygons
stored as lists of rings (``(k, 2)`` arrays, no repeated closing vertex);
containment uses the even-odd rule, with points exactly on a boundary
counted as inside. When two areas share a boundary, the first-listed area
wins, which makes every assignment deterministic.
"""

from dataclasses import dataclass, field

import json

import numpy as np

from .errors import EmptyAreaAtResolution, MalformedInput

#: Assignment value for grid points not contained in any area.
OUTSIDE = -1


def ring_area(ring):
    """Signed shoelace area of one ring (positive if counterclockwise)."""
    x, y = np.asarray(ring, dtype=float).T
    x2, y2 = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * np.sum(x * y2 - x2 * y)


def polygon_area(rings):
    """Planar area of a polygon given as [exterior, hole, hole, ...]."""
    if not rings:
        return 0.0
    area = abs(ring_area(rings[0]))
    for hole in rings[1:]:
        area -= abs(ring_area(hole))
    return area


def _as_ring(coords, where):
    ring = np.asarray(coords, dtype=float)
    if ring.ndim != 2 or ring.shape[1] < 2:
        raise MalformedInput(f"{where}: ring is not a list of [x, y] pairs")
    ring = ring[:, :2]
    if len(ring) >= 2 and np.array_equal(ring[0], ring[-1]):
        ring = ring[:-1]
    if len(ring) < 3:
        raise MalformedInput(f"{where}: ring has fewer than 3 distinct vertices")
    if not np.all(np.isfinite(ring)):
        raise MalformedInput(f"{where}: non-finite coordinate")
    return ring


@dataclass
class RegionSystem:
    """Ordered disjoint areas with identifiers, geometries, and planar sizes.

    ``polygons[d]`` is a list of polygons for area ``d``; each polygon is a
    list of rings with the exterior first. ``sizes[d]`` is the shoelace
    area with holes subtracted.
    """

    ids: list
    polygons: list
    sizes: np.ndarray
    bboxes: np.ndarray = field(default=None)

    def __post_init__(self):
        self.sizes = np.asarray(self.sizes, dtype=float)
        if self.bboxes is None:
            boxes = []
            for polys in self.polygons:
                pts = np.concatenate([r for poly in polys for r in poly])
                boxes.append([pts[:, 0].min(), pts[:, 1].min(),
                              pts[:, 0].max(), pts[:, 1].max()])
            self.bboxes = np.asarray(boxes, dtype=float)

    @property
    def n_areas(self):
        return len(self.ids)

    def rings_of(self, d):
        """All rings of area ``d`` flattened (for even-odd containment)."""
        return [ring for poly in self.polygons[d] for ring in poly]

    def bounds(self):
        """(xmin, ymin, xmax, ymax) over all areas."""
        return (self.bboxes[:, 0].min(), self.bboxes[:, 1].min(),
                self.bboxes[:, 2].max(), self.bboxes[:, 3].max())


def load_regions(path, id_property="id"):
    """Parse a GeoJSON FeatureCollection of (Multi)Polygons into a RegionSystem.

    Areas keep file order; sizes come from the planar shoelace formula with
    holes subtracted. Raises :class:`MalformedInput` on structural problems,
    missing/duplicate ids, non-polygonal geometry, or zero-area polygons.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInput(f"{path}: {exc}") from exc

    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise MalformedInput(f"{path}: not a GeoJSON FeatureCollection")

    ids, polygons, sizes = [], [], []
    for k, feat in enumerate(doc.get("features", [])):
        where = f"{path}: feature {k}"
        props = feat.get("properties") or {}
        if id_property not in props:
            raise MalformedInput(f"{where}: missing id property {id_property!r}")
        area_id = str(props[id_property])
        if area_id in ids:
            raise MalformedInput(f"{where}: duplicate id {area_id!r}")
        geom = feat.get("geometry") or {}
        gtype = geom.get("type")
        coords = geom.get("coordinates")
        if gtype == "Polygon":
            poly_coords = [coords]
        elif gtype == "MultiPolygon":
            poly_coords = coords
        else:
            raise MalformedInput(f"{where}: geometry type {gtype!r} is not polygonal")
        polys = [[_as_ring(ring, where) for ring in poly] for poly in poly_coords]
        size = sum(polygon_area(poly) for poly in polys)
        if not size > 0:
            raise MalformedInput(f"{where}: polygon has zero area")
        ids.append(area_id)
        polygons.append(polys)
        sizes.append(size)

    if not ids:
        raise MalformedInput(f"{path}: no features")
    return RegionSystem(ids=ids, polygons=polygons, sizes=np.array(sizes))


def contains(points, rings):
    """Even-odd containment of ``(m, 2)`` points in a set of rings.

    Points exactly on a ring edge count as contained.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    px, py = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    on_edge = np.zeros(len(pts), dtype=bool)
    for ring in rings:
        x1, y1 = ring.T
        x2, y2 = np.roll(ring, -1, axis=0).T
        for k in range(len(ring)):
            ax, ay, bx, by = x1[k], y1[k], x2[k], y2[k]
            crosses = (ay > py) != (by > py)
            if crosses.any():
                with np.errstate(divide="ignore", invalid="ignore"):
                    xint = ax + (py - ay) * (bx - ax) / (by - ay)
                inside ^= crosses & (px < xint)
            cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
            seg = (
                (cross == 0.0)
                & (px >= min(ax, bx)) & (px <= max(ax, bx))
                & (py >= min(ay, by)) & (py <= max(ay, by))
            )
            on_edge |= seg
    return inside | on_edge


def locate(point, regions):
    """Index of the first area containing ``point``, or :data:`OUTSIDE`.

    Boundary points tie-break to the first containing area in list order.
    """
    x, y = float(point[0]), float(point[1])
    pt = np.array([[x, y]])
    for d in range(regions.n_areas):
        bx0, by0, bx1, by1 = regions.bboxes[d]
        if not (bx0 <= x <= bx1 and by0 <= y <= by1):
            continue
        if contains(pt, regions.rings_of(d))[0]:
            return d
    return OUTSIDE


@dataclass
class EvaluationGrid:
    """Evenly spaced square-pixel grid of centroids with per-point area assignment.

    ``origin`` is the lower-left corner of the lower-left pixel. The centroid
    of cell (row r, column c) is ``origin + ((c + 0.5) delta, (r + 0.5) delta)``
    with row 0 at the bottom. ``assignment`` holds the containing area index
    per centroid or :data:`OUTSIDE`; ``mask`` is ``assignment >= 0``.
    """

    origin: tuple
    delta: float
    ncols: int
    nrows: int
    assignment: np.ndarray
    n_areas: int

    def __post_init__(self):
        self.assignment = np.asarray(self.assignment, dtype=np.int32).reshape(
            self.nrows, self.ncols
        )
        self._area_idx = None

    @property
    def size(self):
        return self.ncols * self.nrows

    @property
    def mask(self):
        return self.assignment >= 0

    @property
    def mask_count(self):
        return int(np.count_nonzero(self.assignment >= 0))

    def xs(self):
        """Centroid x coordinates per column, shape (ncols,)."""
        return self.origin[0] + (np.arange(self.ncols) + 0.5) * self.delta

    def ys(self):
        """Centroid y coordinates per row, shape (nrows,)."""
        return self.origin[1] + (np.arange(self.nrows) + 0.5) * self.delta

    def centroids(self, flat_indices=None):
        """Centroid coordinates, shape (m, 2), for flat indices (default: all)."""
        if flat_indices is None:
            flat_indices = np.arange(self.size)
        flat_indices = np.asarray(flat_indices)
        r, c = np.divmod(flat_indices, self.ncols)
        return np.column_stack([
            self.origin[0] + (c + 0.5) * self.delta,
            self.origin[1] + (r + 0.5) * self.delta,
        ])

    def flat_indices_of(self, points, tol=1e-6):
        """Flat lattice index of each lattice-aligned point.

        Returns None if any point is off-lattice beyond ``tol`` cells or out
        of the grid extent.
        """
        pts = np.asarray(points, dtype=float)
        fc = (pts[:, 0] - self.origin[0]) / self.delta - 0.5
        fr = (pts[:, 1] - self.origin[1]) / self.delta - 0.5
        c = np.rint(fc).astype(np.int64)
        r = np.rint(fr).astype(np.int64)
        if (np.abs(fc - c).max(initial=0.0) > tol or
                np.abs(fr - r).max(initial=0.0) > tol):
            return None
        if ((c < 0).any() or (c >= self.ncols).any() or
                (r < 0).any() or (r >= self.nrows).any()):
            return None
        return r * self.ncols + c

    def area_indices(self, d):
        """Flat indices of grid points assigned to area ``d`` (cached)."""
        if self._area_idx is None:
            flat = self.assignment.ravel()
            self._area_idx = [
                np.flatnonzero(flat == d) for d in range(self.n_areas)
            ]
        return self._area_idx[d]

    def same_lattice(self, other):
        return (
            self.ncols == other.ncols
            and self.nrows == other.nrows
            and self.delta == other.delta
            and tuple(self.origin) == tuple(other.origin)
        )


def _assign(regions, origin, delta, ncols, nrows):
    xs = origin[0] + (np.arange(ncols) + 0.5) * delta
    ys = origin[1] + (np.arange(nrows) + 0.5) * delta
    assignment = np.full((nrows, ncols), OUTSIDE, dtype=np.int32)
    xx, yy = np.meshgrid(xs, ys)
    for d in range(regions.n_areas):
        bx0, by0, bx1, by1 = regions.bboxes[d]
        cand = (
            (assignment == OUTSIDE)
            & (xx >= bx0) & (xx <= bx1) & (yy >= by0) & (yy <= by1)
        )
        if not cand.any():
            continue
        rows, cols = np.nonzero(cand)
        pts = np.column_stack([xx[rows, cols], yy[rows, cols]])
        hit = contains(pts, regions.rings_of(d))
        assignment[rows[hit], cols[hit]] = d
    return assignment


def build_grid(regions, delta):
    """Build the evaluation grid for a region system.

    The grid covers the bounding box of all areas expanded by one ``delta``
    margin per side. Every area must capture at least one centroid, else
    :class:`EmptyAreaAtResolution` is raised.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    xmin, ymin, xmax, ymax = regions.bounds()
    origin = (xmin - delta, ymin - delta)
    ncols = int(np.ceil((xmax + delta - origin[0]) / delta))
    nrows = int(np.ceil((ymax + delta - origin[1]) / delta))
    assignment = _assign(regions, origin, delta, ncols, nrows)
    grid = EvaluationGrid(origin, float(delta), ncols, nrows, assignment,
                          regions.n_areas)
    _check_coverage(grid, regions)
    return grid


def reassign(grid, regions):
    """Same lattice as ``grid``, reassigned against a different region system."""
    assignment = _assign(regions, grid.origin, grid.delta, grid.ncols, grid.nrows)
    out = EvaluationGrid(grid.origin, grid.delta, grid.ncols, grid.nrows,
                         assignment, regions.n_areas)
    _check_coverage(out, regions)
    return out


def _check_coverage(grid, regions):
    counts = np.bincount(grid.assignment.ravel()[grid.assignment.ravel() >= 0],
                         minlength=regions.n_areas)
    for d in range(regions.n_areas):
        if counts[d] == 0:
            raise EmptyAreaAtResolution(regions.ids[d])
