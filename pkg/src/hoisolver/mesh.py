"""Triangle meshes: loading, containment, and nearest-surface queries."""

import struct
from pathlib import Path

import numpy as np

from .errors import NotWatertight
from .geometry import PointCloud

_DEGENERATE_AREA = 1e-14


class TriangleMesh:
    """Immutable triangle mesh in object-local coordinates (meters).

    Degenerate (zero-area or repeated-index) faces are dropped at
    construction. The watertightness check runs once and its result is stored;
    containment queries require it to have passed.
    """

    def __init__(self, vertices, faces):
        vertices = np.ascontiguousarray(np.asarray(vertices, dtype=float).reshape(-1, 3))
        faces = np.ascontiguousarray(np.asarray(faces, dtype=np.int64).reshape(-1, 3))
        if faces.size and faces.max() >= len(vertices):
            raise ValueError("face index out of range")
        if faces.size and faces.min() < 0:
            raise ValueError("negative face index")
        faces = self._drop_degenerate(vertices, faces)
        self.vertices = vertices
        self.faces = faces
        self.vertices.setflags(write=False)
        self.faces.setflags(write=False)
        self.is_watertight = self._check_watertight()
        self._bvh = None

    @staticmethod
    def _drop_degenerate(vertices, faces):
        if len(faces) == 0:
            return faces
        distinct = ((faces[:, 0] != faces[:, 1])
                    & (faces[:, 1] != faces[:, 2])
                    & (faces[:, 0] != faces[:, 2]))
        faces = faces[distinct]
        v0, v1, v2 = (vertices[faces[:, k]] for k in range(3))
        area2 = np.linalg.norm(np.cross(v1 - v0, v2 - v0), axis=1)
        return faces[area2 > _DEGENERATE_AREA]

    def _check_watertight(self):
        """Closed orientable surface: every directed edge matched by its reverse."""
        if len(self.faces) == 0:
            return False
        edges = np.concatenate([self.faces[:, [0, 1]],
                                self.faces[:, [1, 2]],
                                self.faces[:, [2, 0]]])
        fwd = set(map(tuple, edges))
        if len(fwd) != len(edges):
            return False  # duplicated directed edge -> inconsistent orientation
        return all((b, a) in fwd for a, b in fwd)

    # -- queries ------------------------------------------------------------

    def winding_number(self, points):
        """Generalized winding number of each query point (~1 inside, ~0 outside)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty(len(points))
        v0 = self.vertices[self.faces[:, 0]]
        v1 = self.vertices[self.faces[:, 1]]
        v2 = self.vertices[self.faces[:, 2]]
        for i, p in enumerate(points):
            a = v0 - p
            b = v1 - p
            c = v2 - p
            la = np.linalg.norm(a, axis=1)
            lb = np.linalg.norm(b, axis=1)
            lc = np.linalg.norm(c, axis=1)
            det = np.einsum("ij,ij->i", a, np.cross(b, c))
            denom = (la * lb * lc
                     + np.einsum("ij,ij->i", a, b) * lc
                     + np.einsum("ij,ij->i", b, c) * la
                     + np.einsum("ij,ij->i", c, a) * lb)
            out[i] = np.sum(2.0 * np.arctan2(det, denom)) / (4.0 * np.pi)
        return out

    def contains(self, points):
        """Inside test via winding number >= 0.5 (boundary-inclusive).

        Raises NotWatertight if the mesh failed the closedness check.
        """
        if not self.is_watertight:
            raise NotWatertight("containment requires a closed orientable surface")
        points = np.asarray(points, dtype=float)
        single = points.ndim == 1
        w = self.winding_number(points)
        inside = w >= 0.5
        return bool(inside[0]) if single else inside

    def surface_distance(self, points):
        """Exact minimum distance to the surface plus the nearest surface point.

        Returns (distances, closest_points); scalars for a single query point.
        """
        points = np.asarray(points, dtype=float)
        single = points.ndim == 1
        pts = np.atleast_2d(points)
        if self._bvh is None:
            self._bvh = _Bvh(self.vertices, self.faces)
        dist = np.empty(len(pts))
        closest = np.empty((len(pts), 3))
        for i, p in enumerate(pts):
            dist[i], closest[i] = self._bvh.nearest(p)
        if single:
            return float(dist[0]), closest[0]
        return dist, closest

    def sample_surface(self, n, rng):
        """Area-weighted random surface samples (used for collision tests)."""
        v0 = self.vertices[self.faces[:, 0]]
        v1 = self.vertices[self.faces[:, 1]]
        v2 = self.vertices[self.faces[:, 2]]
        areas = 0.5 * np.linalg.norm(np.cross(v1 - v0, v2 - v0), axis=1)
        probs = areas / areas.sum()
        idx = rng.choice(len(self.faces), size=n, p=probs)
        u = rng.random(n)
        v = rng.random(n)
        flip = u + v > 1.0
        u[flip] = 1.0 - u[flip]
        v[flip] = 1.0 - v[flip]
        return (v0[idx] * (1 - u - v)[:, None] + v1[idx] * u[:, None] + v2[idx] * v[:, None])

    def bounds(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


def point_triangle_closest(points, v0, v1, v2):
    """Closest point on triangle (v0, v1, v2) for each row of `points`.

    Uses the plane projection when its barycentric coordinates are all
    non-negative, otherwise the nearest of the three edge segments.
    Returns (distances, closest_points).
    """
    points = np.atleast_2d(points)
    n = np.cross(v1 - v0, v2 - v0)
    nn = np.dot(n, n)

    best_d2 = np.full(len(points), np.inf)
    best_pt = np.zeros((len(points), 3))

    if nn > 0:
        # projection onto the triangle plane, barycentric inside-test
        d = points - v0
        t = (d @ n) / nn
        proj = points - t[:, None] * n
        w = proj - v0
        e0 = v1 - v0
        e1 = v2 - v0
        d00 = np.dot(e0, e0)
        d01 = np.dot(e0, e1)
        d11 = np.dot(e1, e1)
        denom = d00 * d11 - d01 * d01
        if denom > 0:
            w0 = w @ e0
            w1 = w @ e1
            bu = (d11 * w0 - d01 * w1) / denom
            bv = (d00 * w1 - d01 * w0) / denom
            inside = (bu >= 0) & (bv >= 0) & (bu + bv <= 1)
            d2 = np.einsum("ij,ij->i", points - proj, points - proj)
            best_d2 = np.where(inside, d2, best_d2)
            best_pt = np.where(inside[:, None], proj, best_pt)

    for a, b in ((v0, v1), (v1, v2), (v2, v0)):
        ab = b - a
        denom = float(np.dot(ab, ab))
        if denom == 0.0:
            continue
        s = np.clip(((points - a) @ ab) / denom, 0.0, 1.0)
        cand = a + s[:, None] * ab
        d2 = np.einsum("ij,ij->i", points - cand, points - cand)
        better = d2 < best_d2
        best_d2 = np.where(better, d2, best_d2)
        best_pt = np.where(better[:, None], cand, best_pt)

    return np.sqrt(best_d2), best_pt


def brute_force_surface_distance(mesh, p):
    """Exhaustive per-triangle scan; independent reference for the BVH path."""
    p = np.asarray(p, dtype=float)
    best = np.inf
    best_pt = None
    for f in mesh.faces:
        d, c = point_triangle_closest(p[None, :], mesh.vertices[f[0]],
                                      mesh.vertices[f[1]], mesh.vertices[f[2]])
        if d[0] < best:
            best = d[0]
            best_pt = c[0]
    return float(best), best_pt


class _Bvh:
    """Median-split AABB tree over triangles for nearest-surface queries."""

    LEAF_SIZE = 8

    def __init__(self, vertices, faces):
        self.vertices = vertices
        self.faces = faces
        tri_min = np.minimum(np.minimum(vertices[faces[:, 0]], vertices[faces[:, 1]]),
                             vertices[faces[:, 2]])
        tri_max = np.maximum(np.maximum(vertices[faces[:, 0]], vertices[faces[:, 1]]),
                             vertices[faces[:, 2]])
        self.tri_min = tri_min
        self.tri_max = tri_max
        centroids = (vertices[faces[:, 0]] + vertices[faces[:, 1]] + vertices[faces[:, 2]]) / 3.0
        order = np.arange(len(faces))
        # nodes: (lo, hi, left, right, box_min, box_max); leaf when left == -1
        self.nodes = []
        self.order = order
        if len(faces):
            self._build(0, len(faces), centroids)

    def _build(self, lo, hi, centroids):
        idx = self.order[lo:hi]
        box_min = self.tri_min[idx].min(axis=0)
        box_max = self.tri_max[idx].max(axis=0)
        node_id = len(self.nodes)
        self.nodes.append([lo, hi, -1, -1, box_min, box_max])
        if hi - lo <= self.LEAF_SIZE:
            return node_id
        axis = int(np.argmax(box_max - box_min))
        mid = (lo + hi) // 2
        part = np.argsort(centroids[idx][:, axis], kind="stable")
        self.order[lo:hi] = idx[part]
        left = self._build(lo, mid, centroids)
        right = self._build(mid, hi, centroids)
        self.nodes[node_id][2] = left
        self.nodes[node_id][3] = right
        return node_id

    @staticmethod
    def _box_dist2(p, box_min, box_max):
        d = np.maximum(np.maximum(box_min - p, 0.0), p - box_max)
        return float(np.dot(d, d))

    def nearest(self, p):
        if not self.nodes:
            return np.inf, np.full(3, np.nan)
        best_d = np.inf
        best_pt = np.full(3, np.nan)
        stack = [0]
        while stack:
            node = self.nodes[stack.pop()]
            lo, hi, left, right, box_min, box_max = node
            if self._box_dist2(p, box_min, box_max) >= best_d * best_d:
                continue
            if left == -1:
                for fi in self.order[lo:hi]:
                    f = self.faces[fi]
                    d, c = point_triangle_closest(
                        p[None, :], self.vertices[f[0]], self.vertices[f[1]],
                        self.vertices[f[2]])
                    if d[0] < best_d:
                        best_d = float(d[0])
                        best_pt = c[0]
            else:
                dl = self._box_dist2(p, self.nodes[left][4], self.nodes[left][5])
                dr = self._box_dist2(p, self.nodes[right][4], self.nodes[right][5])
                # visit nearer child first
                if dl <= dr:
                    stack.append(right)
                    stack.append(left)
                else:
                    stack.append(left)
                    stack.append(right)
        return best_d, best_pt


# -- file IO ------------------------------------------------------------------

def load_mesh(path):
    """Load a TriangleMesh from OBJ or PLY (vertices + faces, meters)."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".obj":
        return _load_obj(path)
    if suffix == ".ply":
        v, f = _load_ply(path)
        if f is None or len(f) == 0:
            raise ValueError(f"{path}: PLY has no faces; use load_point_cloud for clouds")
        return TriangleMesh(v, f)
    raise ValueError(f"unsupported mesh format: {path.suffix}")


def load_point_cloud(path):
    path = Path(path)
    if path.suffix.lower() != ".ply":
        raise ValueError(f"unsupported point cloud format: {path.suffix}")
    v, _ = _load_ply(path)
    return PointCloud(v)


def save_obj(path, mesh):
    with open(path, "w") as fh:
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for f in mesh.faces:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")


def save_ply_points(path, points):
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    with open(path, "wb") as fh:
        header = ("ply\nformat binary_little_endian 1.0\n"
                  f"element vertex {len(points)}\n"
                  "property float x\nproperty float y\nproperty float z\n"
                  "end_header\n")
        fh.write(header.encode("ascii"))
        fh.write(points.astype("<f4").tobytes())


def _load_obj(path):
    vertices = []
    faces = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("v "):
                parts = line.split()
                vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
            elif line.startswith("f "):
                idx = [int(tok.split("/")[0]) - 1 for tok in line.split()[1:]]
                for k in range(1, len(idx) - 1):  # fan-triangulate polygons
                    faces.append([idx[0], idx[k], idx[k + 1]])
    return TriangleMesh(vertices, faces)


_PLY_TYPES = {
    "char": ("b", 1), "int8": ("b", 1),
    "uchar": ("B", 1), "uint8": ("B", 1),
    "short": ("h", 2), "int16": ("h", 2),
    "ushort": ("H", 2), "uint16": ("H", 2),
    "int": ("i", 4), "int32": ("i", 4),
    "uint": ("I", 4), "uint32": ("I", 4),
    "float": ("f", 4), "float32": ("f", 4),
    "double": ("d", 8), "float64": ("d", 8),
}


def _load_ply(path):
    """PLY reader for vertex (x, y, z, extras ignored) and face elements."""
    with open(path, "rb") as fh:
        if fh.readline().strip() != b"ply":
            raise ValueError(f"{path}: not a PLY file")
        fmt = None
        elements = []  # (name, count, [(prop_name, type, list_count_type|None)])
        while True:
            line = fh.readline()
            if not line:
                raise ValueError(f"{path}: unexpected end of PLY header")
            tokens = line.decode("ascii").strip().split()
            if not tokens:
                continue
            if tokens[0] == "format":
                fmt = tokens[1]
            elif tokens[0] == "element":
                elements.append((tokens[1], int(tokens[2]), []))
            elif tokens[0] == "property":
                if tokens[1] == "list":
                    elements[-1][2].append((tokens[4], tokens[3], tokens[2]))
                else:
                    elements[-1][2].append((tokens[2], tokens[1], None))
            elif tokens[0] == "end_header":
                break
        if fmt == "ascii":
            reader = _AsciiPlyReader(fh)
        elif fmt == "binary_little_endian":
            reader = _BinaryPlyReader(fh, "<")
        elif fmt == "binary_big_endian":
            reader = _BinaryPlyReader(fh, ">")
        else:
            raise ValueError(f"{path}: unsupported PLY format {fmt}")

        vertices = None
        faces = None
        for name, count, props in elements:
            rows = reader.read_element(count, props)
            if name == "vertex":
                cols = [p[0] for p in props]
                xi, yi, zi = cols.index("x"), cols.index("y"), cols.index("z")
                vertices = np.array([[r[xi], r[yi], r[zi]] for r in rows], dtype=float)
            elif name == "face":
                cols = [p[0] for p in props]
                li = next(i for i, c in enumerate(cols)
                          if c in ("vertex_indices", "vertex_index"))
                faces = []
                for r in rows:
                    idx = r[li]
                    for k in range(1, len(idx) - 1):
                        faces.append([idx[0], idx[k], idx[k + 1]])
                faces = np.array(faces, dtype=np.int64) if faces else np.zeros((0, 3), np.int64)
        if vertices is None:
            raise ValueError(f"{path}: PLY has no vertex element")
        return vertices, faces


class _AsciiPlyReader:
    def __init__(self, fh):
        self.fh = fh

    def read_element(self, count, props):
        rows = []
        for _ in range(count):
            tokens = self.fh.readline().split()
            row = []
            pos = 0
            for _, typ, list_typ in props:
                cast = float if typ in ("float", "float32", "double", "float64") else int
                if list_typ is None:
                    row.append(cast(tokens[pos]))
                    pos += 1
                else:
                    n = int(tokens[pos])
                    pos += 1
                    row.append([int(t) for t in tokens[pos:pos + n]])
                    pos += n
            rows.append(row)
        return rows


class _BinaryPlyReader:
    def __init__(self, fh, endian):
        self.fh = fh
        self.endian = endian

    def _read(self, typ):
        code, size = _PLY_TYPES[typ]
        return struct.unpack(self.endian + code, self.fh.read(size))[0]

    def read_element(self, count, props):
        rows = []
        for _ in range(count):
            row = []
            for _, typ, list_typ in props:
                if list_typ is None:
                    row.append(self._read(typ))
                else:
                    n = int(self._read(list_typ))
                    row.append([int(self._read(typ)) for _ in range(n)])
            rows.append(row)
        return rows


# -- primitive constructors (synthetic fixtures and the human collision proxy) --

def make_box(extents=(1.0, 1.0, 1.0), center=(0.0, 0.0, 0.0)):
    """Axis-aligned closed box with outward-facing triangles."""
    ex, ey, ez = np.asarray(extents, dtype=float) / 2.0
    c = np.asarray(center, dtype=float)
    v = np.array([[-ex, -ey, -ez], [ex, -ey, -ez], [ex, ey, -ez], [-ex, ey, -ez],
                  [-ex, -ey, ez], [ex, -ey, ez], [ex, ey, ez], [-ex, ey, ez]]) + c
    f = np.array([
        [0, 2, 1], [0, 3, 2],  # z-
        [4, 5, 6], [4, 6, 7],  # z+
        [0, 1, 5], [0, 5, 4],  # y-
        [2, 3, 7], [2, 7, 6],  # y+
        [1, 2, 6], [1, 6, 5],  # x+
        [3, 0, 4], [3, 4, 7],  # x-
    ])
    return TriangleMesh(v, f)


def make_icosphere(radius=1.0, subdivisions=2, center=(0.0, 0.0, 0.0)):
    t = (1.0 + np.sqrt(5.0)) / 2.0
    v = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=float)
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    f = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
    verts = list(map(tuple, v))
    cache = {}

    def midpoint(i, j):
        key = (min(i, j), max(i, j))
        if key not in cache:
            m = np.asarray(verts[i]) + np.asarray(verts[j])
            m /= np.linalg.norm(m)
            cache[key] = len(verts)
            verts.append(tuple(m))
        return cache[key]

    for _ in range(subdivisions):
        nf = []
        for a, b, c in f:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            nf += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        f = nf
    vv = np.asarray(verts) * radius + np.asarray(center, dtype=float)
    return TriangleMesh(vv, f)


def make_capsule_mesh(a, b, radius, segments=8, rings=4):
    """Closed capsule around segment a-b (cylinder plus hemispherical caps)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    axis = b - a
    h = np.linalg.norm(axis)
    if h < 1e-12:
        return make_icosphere(radius, 1, a)
    z = axis / h
    x = np.cross(z, [0.0, 0.0, 1.0])
    if np.linalg.norm(x) < 1e-6:
        x = np.cross(z, [0.0, 1.0, 0.0])
    x /= np.linalg.norm(x)
    y = np.cross(z, x)

    verts = []
    # latitude rows from just above the bottom pole, through both seam rings,
    # to just below the top pole; the poles themselves are single vertices
    lats = ([-np.pi / 2 + k * (np.pi / 2) / rings for k in range(1, rings + 1)]  # lower cap
            + [0.0]                                                             # seam at b
            + [k * (np.pi / 2) / rings for k in range(1, rings)])                # upper cap
    centers = [a] * rings + [b] * rings
    row_index = []
    for lat, cen in zip(lats, centers):
        r = radius * np.cos(lat)
        zoff = radius * np.sin(lat)
        row = []
        for s in range(segments):
            ang = 2 * np.pi * s / segments
            p = cen + r * (np.cos(ang) * x + np.sin(ang) * y) + zoff * z
            row.append(len(verts))
            verts.append(p)
        row_index.append(row)
    bot = len(verts)
    verts.append(a - radius * z)
    top = len(verts)
    verts.append(b + radius * z)

    faces = []
    for r0, r1 in zip(row_index[:-1], row_index[1:]):
        for s in range(segments):
            s2 = (s + 1) % segments
            faces.append([r0[s], r0[s2], r1[s2]])
            faces.append([r0[s], r1[s2], r1[s]])
    for s in range(segments):
        s2 = (s + 1) % segments
        faces.append([bot, row_index[0][s2], row_index[0][s]])
        faces.append([top, row_index[-1][s], row_index[-1][s2]])
    return TriangleMesh(verts, faces)
