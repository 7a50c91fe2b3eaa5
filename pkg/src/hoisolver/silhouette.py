"""Software silhouette rendering and mask-space operations.

Masks are (height, width) float arrays in [0, 1]. The rasterizer is a soft
coverage model: each pixel takes sigmoid(signed distance to the projected
triangle boundary / sigma), composited by max over triangles, so the mask is
differentiable in pose through the projected geometry.
"""

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import DimensionMismatch
from .geometry import DEPTH_EPSILON, CameraModel, transform_point

# pixels farther than this many sigmas outside every triangle round to 0
_SUPPORT_SIGMAS = 12.0


def rasterize_silhouette(mesh, pose, cam: CameraModel, sigma: float = 1.0):
    """Render a soft binary silhouette of the posed mesh.

    Per pixel the value is sigmoid(sd / sigma) of the max-composited signed
    distance to the projected triangles; pixels more than two pixels inside
    the hard coverage union saturate to exactly 1, which removes the seams
    that interior shared edges would otherwise leave. Faces with any vertex
    at or behind the camera plane are culled (partial clipping is not
    supported; silhouette losses only see fully visible bodies).
    Deterministic for identical inputs.
    """
    sd_max = np.full((cam.height, cam.width), -np.inf)
    if len(mesh.faces) == 0:
        return np.zeros((cam.height, cam.width))
    world = transform_point(pose, mesh.vertices)
    z = world[:, 2]
    uv = np.empty((len(world), 2))
    valid = z > DEPTH_EPSILON
    uv[valid, 0] = cam.fx * world[valid, 0] / z[valid] + cam.cx
    uv[valid, 1] = cam.fy * world[valid, 1] / z[valid] + cam.cy

    pad = _SUPPORT_SIGMAS * sigma
    for f in mesh.faces:
        if not (valid[f[0]] and valid[f[1]] and valid[f[2]]):
            continue
        tri = uv[f]
        x0 = max(int(np.floor(tri[:, 0].min() - pad)), 0)
        x1 = min(int(np.ceil(tri[:, 0].max() + pad)) + 1, cam.width)
        y0 = max(int(np.floor(tri[:, 1].min() - pad)), 0)
        y1 = min(int(np.ceil(tri[:, 1].max() + pad)) + 1, cam.height)
        if x0 >= x1 or y0 >= y1:
            continue
        xs = np.arange(x0, x1, dtype=float)
        ys = np.arange(y0, y1, dtype=float)
        px, py = np.meshgrid(xs, ys)
        sd = _triangle_signed_distance(px.ravel(), py.ravel(), tri).reshape(py.shape)
        np.maximum(sd_max[y0:y1, x0:x1], sd, out=sd_max[y0:y1, x0:x1])

    with np.errstate(over="ignore"):
        out = 1.0 / (1.0 + np.exp(-sd_max / sigma))
    inside = sd_max >= 0.0
    if inside.any():
        if inside.all():
            out[:] = 1.0
        else:
            depth_px = ndimage.distance_transform_edt(inside)
            out[depth_px >= 2.0] = 1.0
    return out


def _triangle_signed_distance(px, py, tri):
    """Signed 2D distance to the triangle boundary: positive inside."""
    d2_min = np.full(px.shape, np.inf)
    side = np.zeros((3, px.size))
    for k in range(3):
        ax, ay = tri[k]
        bx, by = tri[(k + 1) % 3]
        ex, ey = bx - ax, by - ay
        wx, wy = px - ax, py - ay
        denom = ex * ex + ey * ey
        if denom > 0:
            t = np.clip((wx * ex + wy * ey) / denom, 0.0, 1.0)
        else:
            t = np.zeros_like(wx)
        dx = wx - t * ex
        dy = wy - t * ey
        d2_min = np.minimum(d2_min, dx * dx + dy * dy)
        side[k] = ex * wy - ey * wx
    inside = (np.all(side >= 0, axis=0) | np.all(side <= 0, axis=0))
    return np.where(inside, 1.0, -1.0) * np.sqrt(d2_min)


def occlusion_mask(rendered, other_gt):
    """Hide the part of a rendered mask occluded by the other body's GT mask:
    per-pixel rendered * (1 - other_gt)."""
    rendered = np.asarray(rendered, dtype=float)
    other_gt = np.asarray(other_gt, dtype=float)
    if rendered.shape != other_gt.shape:
        raise DimensionMismatch(f"{rendered.shape} vs {other_gt.shape}")
    return rendered * (1.0 - other_gt)


def extract_edges(mask):
    """Boundary band: 3x3 max-pool of the mask minus the mask, clamped to [0, 1]."""
    mask = np.asarray(mask, dtype=float)
    pooled = ndimage.maximum_filter(mask, size=3, mode="nearest")
    return np.clip(pooled - mask, 0.0, 1.0)


def distance_transform(edges):
    """Exact Euclidean distance (pixels) to the nearest edge pixel.

    Edges are binarized at 0.5. An empty edge set yields a field of +inf so
    that downstream edge losses contribute zero.
    """
    edges = np.asarray(edges, dtype=float)
    is_edge = edges >= 0.5
    if not is_edge.any():
        return np.full(edges.shape, np.inf)
    return ndimage.distance_transform_edt(~is_edge)


def mse(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def weighted_edge_sum(edge_mask, weights):
    """Sum of edge activations times distance weights, ignoring +inf sentinels."""
    edge_mask = np.asarray(edge_mask, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if edge_mask.shape != weights.shape:
        raise DimensionMismatch(f"{edge_mask.shape} vs {weights.shape}")
    finite = np.isfinite(weights)
    if not finite.any():
        return 0.0
    return float(np.sum(edge_mask[finite] * weights[finite]))


def load_mask_png(path):
    """Single-channel PNG ground-truth mask, binarized at 128."""
    img = np.asarray(Image.open(path).convert("L"))
    return (img >= 128).astype(float)


def save_mask_png(path, mask):
    arr = (np.clip(np.asarray(mask, dtype=float), 0.0, 1.0) * 255).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path)


def camera_scaled(cam: CameraModel, max_dim: int) -> CameraModel:
    """Camera for loss-time rendering, downsampled to bound the longest side."""
    s = min(1.0, max_dim / max(cam.width, cam.height))
    if s == 1.0:
        return cam
    return CameraModel(fx=cam.fx * s, fy=cam.fy * s,
                       cx=cam.cx * s, cy=cam.cy * s,
                       width=max(1, int(round(cam.width * s))),
                       height=max(1, int(round(cam.height * s))))


def downsample_mask(mask, out_h, out_w):
    """Block-average a mask onto a coarser grid (values stay in [0, 1])."""
    mask = np.asarray(mask, dtype=float)
    h, w = mask.shape
    ys = (np.arange(h) * out_h) // h
    xs = (np.arange(w) * out_w) // w
    out = np.zeros((out_h, out_w))
    counts = np.zeros((out_h, out_w))
    np.add.at(out, (ys[:, None], xs[None, :]), mask)
    np.add.at(counts, (ys[:, None], xs[None, :]), 1.0)
    return out / np.maximum(counts, 1.0)
