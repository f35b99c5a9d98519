"""1D interval meshes and 2D polygonal tessellations.

PolyMesh stores vertices plus counterclockwise cell loops and derives all
connectivity (edges, normals, edge-neighbor stencils) on construction. Interior
edges appear once, with the unit normal pointing from the left cell to the
right cell. Generators: uniform quad grids and Lloyd-relaxed clipped Voronoi
tessellations (deterministic given a seed).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Voronoi

from .errors import DegenerateCell, InvalidBounds, ParseError

AREA_FLOOR_REL = 1e-12
CLOSURE_TOL = 1e-12


@dataclass(frozen=True)
class Mesh1D:
    """Uniform partition of [xi_left, xi_right] into n_cells intervals."""

    xi_left: float
    xi_right: float
    n_cells: int

    def __post_init__(self):
        if not self.xi_left < self.xi_right:
            raise InvalidBounds(f"empty interval [{self.xi_left}, {self.xi_right}]")
        if self.n_cells < 3:
            raise InvalidBounds(f"need at least 3 cells, got {self.n_cells}")

    @property
    def dx(self) -> float:
        return (self.xi_right - self.xi_left) / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.xi_left + (np.arange(self.n_cells) + 0.5) * self.dx


def build_1d(xi_left: float, xi_right: float, n_cells: int) -> Mesh1D:
    """Uniform 1D mesh."""
    return Mesh1D(float(xi_left), float(xi_right), int(n_cells))


@dataclass
class PolyMesh:
    """Polygonal tessellation with derived connectivity (immutable by use).

    Cell loops are counterclockwise. Edge arrays: ``edge_vertices`` (E, 2),
    ``edge_cells`` (E, 2) with right = -1 on the boundary, unit ``normals``
    pointing left-to-right, ``midpoints``, ``lengths``. ``cell_edges`` /
    ``cell_edge_sign`` give, per cell (CSR via ``cell_edge_ptr``), its edge
    ids and +1/-1 for being the left/right cell. ``stencil`` lists the
    edge-sharing neighbors (CSR via ``stencil_ptr``).
    """

    vertices: np.ndarray
    cell_vertex_ptr: np.ndarray
    cell_vertex_idx: np.ndarray
    centroids: np.ndarray = field(init=False)
    areas: np.ndarray = field(init=False)

    def __post_init__(self):
        self._build_cells()
        self._build_edges()
        self._check_invariants()

    # -- construction -------------------------------------------------------

    @property
    def n_cells(self) -> int:
        return len(self.cell_vertex_ptr) - 1

    @property
    def n_edges(self) -> int:
        return len(self.lengths)

    def cell_loop(self, k: int) -> np.ndarray:
        return self.cell_vertex_idx[self.cell_vertex_ptr[k]:self.cell_vertex_ptr[k + 1]]

    def _build_cells(self):
        n = self.n_cells
        self.centroids = np.empty((n, 2))
        self.areas = np.empty(n)
        for k in range(n):
            loop = self.cell_loop(k)
            p = self.vertices[loop]
            x, y = p[:, 0], p[:, 1]
            xn, yn = np.roll(x, -1), np.roll(y, -1)
            cross = x * yn - xn * y
            area = 0.5 * cross.sum()
            if area <= 0.0:
                raise DegenerateCell(f"cell {k} is degenerate or not counterclockwise")
            self.areas[k] = area
            self.centroids[k, 0] = ((x + xn) * cross).sum() / (6.0 * area)
            self.centroids[k, 1] = ((y + yn) * cross).sum() / (6.0 * area)
        floor = AREA_FLOOR_REL * self.areas.sum()
        if self.areas.min() < floor:
            raise DegenerateCell(
                f"cell {int(self.areas.argmin())} area {self.areas.min():.3e} below floor"
            )

    def _build_edges(self):
        first = {}
        ev, ec = [], []
        cell_edges = [[] for _ in range(self.n_cells)]
        for k in range(self.n_cells):
            loop = self.cell_loop(k)
            for a, b in zip(loop, np.roll(loop, -1)):
                key = (min(a, b), max(a, b))
                if key not in first:
                    first[key] = len(ev)
                    ev.append((a, b))
                    ec.append([k, -1])
                    cell_edges[k].append((len(ev) - 1, 1))
                else:
                    e = first[key]
                    if ec[e][1] != -1:
                        raise DegenerateCell(f"edge {key} shared by more than two cells")
                    ec[e][1] = k
                    cell_edges[k].append((e, -1))
        self.edge_vertices = np.asarray(ev, dtype=np.int64)
        self.edge_cells = np.asarray(ec, dtype=np.int64)
        pa = self.vertices[self.edge_vertices[:, 0]]
        pb = self.vertices[self.edge_vertices[:, 1]]
        d = pb - pa
        self.lengths = np.hypot(d[:, 0], d[:, 1])
        self.midpoints = 0.5 * (pa + pb)
        # ccw loop: the outward normal of the left cell is the right-rotation
        self.normals = np.column_stack((d[:, 1], -d[:, 0])) / self.lengths[:, None]

        ptr = np.zeros(self.n_cells + 1, dtype=np.int64)
        for k in range(self.n_cells):
            ptr[k + 1] = ptr[k] + len(cell_edges[k])
        self.cell_edge_ptr = ptr
        self.cell_edge_idx = np.empty(ptr[-1], dtype=np.int64)
        self.cell_edge_sign = np.empty(ptr[-1], dtype=np.int64)
        for k in range(self.n_cells):
            for i, (e, s) in enumerate(cell_edges[k]):
                self.cell_edge_idx[ptr[k] + i] = e
                self.cell_edge_sign[ptr[k] + i] = s

        nb = [[] for _ in range(self.n_cells)]
        for kl, kr in self.edge_cells:
            if kr >= 0:
                nb[kl].append(kr)
                nb[kr].append(kl)
        sp = np.zeros(self.n_cells + 1, dtype=np.int64)
        for k in range(self.n_cells):
            sp[k + 1] = sp[k] + len(nb[k])
        self.stencil_ptr = sp
        self.stencil_idx = np.concatenate(
            [np.asarray(v, dtype=np.int64) for v in nb]
        ) if sp[-1] else np.empty(0, dtype=np.int64)

        self.perimeters = np.zeros(self.n_cells)
        for k in range(self.n_cells):
            sl = slice(self.cell_edge_ptr[k], self.cell_edge_ptr[k + 1])
            self.perimeters[k] = self.lengths[self.cell_edge_idx[sl]].sum()

    def _check_invariants(self):
        for k in range(self.n_cells):
            sl = slice(self.cell_edge_ptr[k], self.cell_edge_ptr[k + 1])
            e = self.cell_edge_idx[sl]
            s = self.cell_edge_sign[sl].astype(float)
            closure = (self.normals[e] * (s * self.lengths[e])[:, None]).sum(axis=0)
            if np.abs(closure).max() > CLOSURE_TOL * self.perimeters[k]:
                raise DegenerateCell(f"cell {k} edge loop does not close: {closure}")

    # -- derived quantities --------------------------------------------------

    @property
    def incircle_diameters(self) -> np.ndarray:
        """Incircle diameter of each cell, d_k = 4 |Omega_k| / perimeter."""
        return 4.0 * self.areas / self.perimeters

    @property
    def d_n(self) -> float:
        """Averaged incircle diameter (the characteristic mesh size)."""
        return float(self.incircle_diameters.mean())

    def boundary_edges(self) -> np.ndarray:
        return np.flatnonzero(self.edge_cells[:, 1] < 0)


def _mesh_from_loops(vertices, loops) -> PolyMesh:
    ptr = np.zeros(len(loops) + 1, dtype=np.int64)
    for k, loop in enumerate(loops):
        ptr[k + 1] = ptr[k] + len(loop)
    idx = np.concatenate([np.asarray(l, dtype=np.int64) for l in loops])
    return PolyMesh(np.asarray(vertices, dtype=float), ptr, idx)


def build_quad_grid(bounds, nx: int, ny: int) -> PolyMesh:
    """Axis-aligned rectangle grid of nx * ny quadrilateral cells."""
    (x0, x1), (y0, y1) = bounds
    if not (x0 < x1 and y0 < y1):
        raise InvalidBounds(f"empty rectangle {bounds}")
    if nx < 2 or ny < 2:
        raise InvalidBounds("need at least 2 cells per direction")
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    vid = lambda i, j: j * (nx + 1) + i
    vertices = np.array([(x, y) for y in ys for x in xs])
    loops = [
        [vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]
        for j in range(ny)
        for i in range(nx)
    ]
    return _mesh_from_loops(vertices, loops)


def build_voronoi(bounds, n_seeds: int, lloyd_iters: int = 50, seed: int = 0) -> PolyMesh:
    """Clipped Voronoi tessellation of the rectangle after Lloyd relaxation.

    Clipping is realized by mirroring the seeds across the four rectangle
    sides, so the diagram of the augmented set tiles the rectangle exactly
    with bounded interior cells. Deterministic given ``seed``.
    """
    (x0, x1), (y0, y1) = bounds
    if not (x0 < x1 and y0 < y1):
        raise InvalidBounds(f"empty rectangle {bounds}")
    if n_seeds < 4:
        raise InvalidBounds("need at least 4 seeds")
    rng = np.random.default_rng(seed)
    pts = np.column_stack(
        (rng.uniform(x0, x1, n_seeds), rng.uniform(y0, y1, n_seeds))
    )
    for _ in range(lloyd_iters + 1):
        mirrored = np.vstack(
            [
                pts,
                np.column_stack((2 * x0 - pts[:, 0], pts[:, 1])),
                np.column_stack((2 * x1 - pts[:, 0], pts[:, 1])),
                np.column_stack((pts[:, 0], 2 * y0 - pts[:, 1])),
                np.column_stack((pts[:, 0], 2 * y1 - pts[:, 1])),
            ]
        )
        vor = Voronoi(mirrored)
        polys = []
        for i in range(n_seeds):
            region = vor.regions[vor.point_region[i]]
            if -1 in region or len(region) < 3:
                raise DegenerateCell(f"unbounded Voronoi cell for seed {i}")
            p = vor.vertices[region]
            # ensure counterclockwise order
            if _signed_area(p) < 0:
                p = p[::-1]
            polys.append(p)
        new_pts = np.array([_poly_centroid(p) for p in polys])
        if np.allclose(new_pts, pts, atol=1e-15):
            break
        pts = new_pts

    # deduplicate vertices shared between polygons
    key_of = {}
    vertices = []
    loops = []
    for p in polys:
        loop = []
        for v in p:
            key = (round(v[0], 9), round(v[1], 9))
            if key not in key_of:
                key_of[key] = len(vertices)
                vertices.append(v)
            loop.append(key_of[key])
        loops.append(loop)
    # snap near-boundary vertices exactly onto the rectangle
    vertices = np.asarray(vertices)
    for dim, (lo, hi) in enumerate(((x0, x1), (y0, y1))):
        vertices[np.abs(vertices[:, dim] - lo) < 1e-9, dim] = lo
        vertices[np.abs(vertices[:, dim] - hi) < 1e-9, dim] = hi
    return _mesh_from_loops(vertices, loops)


def _signed_area(p: np.ndarray) -> float:
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float((x * np.roll(y, -1) - np.roll(x, -1) * y).sum())


def _poly_centroid(p: np.ndarray) -> np.ndarray:
    x, y = p[:, 0], p[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * cross.sum()
    return np.array([((x + xn) * cross).sum(), ((y + yn) * cross).sum()]) / (6.0 * a)


def save_mesh(mesh: PolyMesh, path) -> None:
    """Write the POLYMESH v1 text format (vertices + ccw cell loops)."""
    with open(path, "w") as f:
        f.write(f"POLYMESH v1 {len(mesh.vertices)} {mesh.n_cells}\n")
        for v in mesh.vertices:
            f.write(f"v {v[0]:.17g} {v[1]:.17g}\n")
        for k in range(mesh.n_cells):
            ids = " ".join(str(i) for i in mesh.cell_loop(k))
            f.write(f"c {k} {ids}\n")


def load_mesh(path) -> PolyMesh:
    """Read the POLYMESH v1 text format; connectivity is rederived."""
    with open(path) as f:
        lines = f.read().splitlines()
    if not lines:
        raise ParseError("empty mesh file", line=1)
    head = lines[0].split()
    if len(head) != 4 or head[0] != "POLYMESH" or head[1] != "v1":
        raise ParseError(f"bad header {lines[0]!r}", line=1)
    try:
        nv, nc = int(head[2]), int(head[3])
    except ValueError:
        raise ParseError(f"bad header counts {lines[0]!r}", line=1)
    if len(lines) < 1 + nv + nc:
        raise ParseError(f"expected {nv} vertices and {nc} cells", line=len(lines))
    vertices = np.empty((nv, 2))
    for i in range(nv):
        ln = 1 + i
        parts = lines[ln].split()
        if len(parts) != 3 or parts[0] != "v":
            raise ParseError(f"bad vertex line {lines[ln]!r}", line=ln + 1)
        try:
            vertices[i] = (float(parts[1]), float(parts[2]))
        except ValueError:
            raise ParseError(f"bad vertex coordinates {lines[ln]!r}", line=ln + 1)
    loops = []
    for k in range(nc):
        ln = 1 + nv + k
        parts = lines[ln].split()
        if len(parts) < 5 or parts[0] != "c":
            raise ParseError(f"bad cell line {lines[ln]!r}", line=ln + 1)
        try:
            kk = int(parts[1])
            ids = [int(s) for s in parts[2:]]
        except ValueError:
            raise ParseError(f"bad cell ids {lines[ln]!r}", line=ln + 1)
        if kk != k:
            raise ParseError(f"cell ids out of order (got {kk}, want {k})", line=ln + 1)
        if any(i < 0 or i >= nv for i in ids):
            raise ParseError("vertex id out of range", line=ln + 1)
        loops.append(ids)
    return _mesh_from_loops(vertices, loops)
