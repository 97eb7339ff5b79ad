"""Raster primitives: filtering, mask-guided inpainting, seeded color
clustering, binary morphology, and PNG/JPEG I/O.

Images are (H, W, 3) uint8 RGB arrays; masks are (H, W) uint8 arrays with
values {0, 1}; label maps are (H, W) int32. All neighborhood operations
clamp to the edge, and everything is deterministic given identical inputs
and seed.
"""

from __future__ import annotations

import logging
import math
import os
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import InpaintUnderconstrained, InvalidParameter

log = logging.getLogger(__name__)


def require_image(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise InvalidParameter(f"expected (H, W, 3) uint8 image, got {img.shape} {img.dtype}")
    if img.shape[0] == 0 or img.shape[1] == 0:
        raise InvalidParameter("image has zero area")
    return img


def require_mask(mask: np.ndarray, dims: tuple[int, int] | None = None) -> np.ndarray:
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise InvalidParameter(f"expected a 2D mask, got shape {mask.shape}")
    if dims is not None and mask.shape != dims:
        raise InvalidParameter(f"mask shape {mask.shape} does not match image shape {dims}")
    if mask.dtype == bool:
        return mask.astype(np.uint8)
    vals = np.unique(mask)
    if not np.isin(vals, (0, 1)).all():
        raise InvalidParameter("mask values must be 0 or 1")
    return mask.astype(np.uint8)


# ---------------------------------------------------------------------------
# I/O

def read_image(path: str | Path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def write_png(path: str | Path, array: np.ndarray) -> None:
    """Write an RGB image or a binary mask ({0,1} stored as {0,255}) as PNG.

    The file appears atomically: data goes to a temp file in the target
    directory first, then replaces the destination.
    """
    path = Path(path)
    arr = np.asarray(array)
    if arr.ndim == 2:
        img = Image.fromarray((arr.astype(np.uint8) * 255) if arr.max(initial=0) <= 1 else arr.astype(np.uint8), mode="L")
    else:
        img = Image.fromarray(require_image(arr), mode="RGB")
    _atomic_write(path, lambda fh: img.save(fh, format="PNG"))


def write_bytes(path: str | Path, data: bytes) -> None:
    _atomic_write(Path(path), lambda fh: fh.write(data))


def _atomic_write(path: Path, writer) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        os.fchmod(fd, 0o666 & ~_process_umask())
        with os.fdopen(fd, "wb") as fh:
            writer(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _process_umask() -> int:
    current = os.umask(0)
    os.umask(current)
    return current


# ---------------------------------------------------------------------------
# Filtering

def median_filter(img: np.ndarray, kernel: int = 5) -> np.ndarray:
    """Per-channel median over a kernel x kernel neighborhood, edge-clamped."""
    if kernel < 1 or kernel % 2 == 0:
        raise InvalidParameter(f"median kernel must be odd and >= 1, got {kernel}")
    arr = np.asarray(img)
    if kernel == 1:
        return arr.copy()
    if arr.ndim == 2:
        return ndimage.median_filter(arr, size=kernel, mode="nearest")
    require_image(arr)
    return ndimage.median_filter(arr, size=(kernel, kernel, 1), mode="nearest")


def bilateral_filter(
    img: np.ndarray,
    diameter: int = 9,
    sigma_color: float = 75.0,
    sigma_space: float = 75.0,
) -> np.ndarray:
    """Edge-preserving smoothing: Gaussian space and color-range weights over
    a square diameter x diameter window, edge-clamped.

    The color distance is the Euclidean RGB distance, so with a very large
    sigma_color this degenerates to a plain windowed Gaussian blur.
    """
    require_image(img)
    if diameter < 1 or diameter % 2 == 0:
        raise InvalidParameter(f"diameter must be odd and >= 1, got {diameter}")
    if sigma_color <= 0.0 or sigma_space <= 0.0:
        raise InvalidParameter("sigma_color and sigma_space must be positive")
    if diameter == 1:
        return img.copy()
    r = diameter // 2
    src = img.astype(np.float64)
    padded = np.pad(src, ((r, r), (r, r), (0, 0)), mode="edge")
    h, w = img.shape[:2]
    num = np.zeros_like(src)
    den = np.zeros((h, w))
    inv2ss = 1.0 / (2.0 * sigma_space * sigma_space)
    inv2sc = 1.0 / (2.0 * sigma_color * sigma_color)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            shifted = padded[r + dy : r + dy + h, r + dx : r + dx + w, :]
            cd2 = ((shifted - src) ** 2).sum(axis=2)
            wgt = math.exp(-(dx * dx + dy * dy) * inv2ss) * np.exp(-cd2 * inv2sc)
            num += wgt[..., None] * shifted
            den += wgt
    return np.clip(np.rint(num / den[..., None]), 0, 255).astype(np.uint8)


# ---------------------------------------------------------------------------
# Inpainting

def inpaint_fmm(img: np.ndarray, mask: np.ndarray, radius: int = 3) -> np.ndarray:
    """Fill masked pixels from their surroundings, marching inward.

    Pixels fill in increasing distance from the mask boundary (pixels at
    equal distance fill simultaneously). Each becomes the normalized
    weighted average of the already-known pixels within `radius`, weighted
    by direction (alignment with the inward normal), distance, and
    level-set proximity, with a first-order gradient extension so smooth
    ramps continue through the hole. Pixels outside the mask are returned
    bit-identical.
    """
    require_image(img)
    m = require_mask(mask, img.shape[:2]).astype(bool)
    if radius < 1:
        raise InvalidParameter(f"inpaint radius must be >= 1, got {radius}")
    if m.all():
        raise InpaintUnderconstrained("mask covers the whole image; nothing to fill from")
    out = img.copy()
    if not m.any():
        return out

    h, w = m.shape
    dist = ndimage.distance_transform_edt(m)
    grad_y, grad_x = np.gradient(dist)

    # state arrays padded by radius+1: neighbor windows and their +-1
    # gradient probes never leave bounds, and the padding is never "known"
    pad = int(radius) + 1
    w2 = w + 2 * pad
    vals = np.pad(img.astype(np.float64), ((pad, pad), (pad, pad), (0, 0)), mode="constant")
    vflat = vals.reshape(-1, 3)
    kflat = np.pad(~m, pad, mode="constant", constant_values=False).ravel()
    dflat = np.pad(dist, pad, mode="constant", constant_values=0.0).ravel()

    r = int(radius)
    oy, ox = np.mgrid[-r : r + 1, -r : r + 1]
    keep = (oy * oy + ox * ox) <= r * r
    keep[r, r] = False
    oy = oy[keep].ravel().astype(np.int64)
    ox = ox[keep].ravel().astype(np.int64)
    off_flat = oy * w2 + ox
    off_len = np.sqrt((oy * oy + ox * ox).astype(np.float64))
    off_d2 = (oy * oy + ox * ox).astype(np.float64)
    # p - q displacement for each offset
    vy = -oy.astype(np.float64)[None, :]
    vx = -ox.astype(np.float64)[None, :]

    ys, xs = np.nonzero(m)
    d_vals = dist[ys, xs]
    order = np.argsort(d_vals, kind="stable")
    ys, xs, d_vals = ys[order], xs[order], d_vals[order]
    _, starts = np.unique(d_vals, return_index=True)
    bounds = list(starts) + [len(d_vals)]

    for b in range(len(bounds) - 1):
        band = slice(bounds[b], bounds[b + 1])
        py, px = ys[band], xs[band]
        pflat = (py + pad) * w2 + (px + pad)
        q = pflat[:, None] + off_flat[None, :]  # (M, K) padded flat indices
        kn = kflat[q]

        npx = grad_x[py, px][:, None]
        npy = grad_y[py, px][:, None]
        nrm = np.hypot(npx, npy)
        dir_w = np.where(
            nrm > 1e-12,
            np.abs(vx * npx + vy * npy) / (off_len[None, :] * np.maximum(nrm, 1e-12)),
            1.0,
        )
        lev_w = 1.0 / (1.0 + np.abs(d_vals[band][:, None] - dflat[q]))
        wgt = np.maximum(dir_w, 1e-6) / off_d2[None, :] * lev_w * kn

        est = vflat[q] + _known_gradient_terms(vflat, kflat, q, w2, vx, vy)
        wsum = wgt.sum(axis=1)
        filled = (wgt[:, :, None] * est).sum(axis=1) / wsum[:, None]
        vflat[pflat] = filled
        kflat[pflat] = True

    core = vals[pad : pad + h, pad : pad + w]
    out[m] = np.clip(np.rint(core[m]), 0, 255).astype(np.uint8)
    return out


def _known_gradient_terms(vflat, kflat, q, w2, vx, vy):
    """First-order extension grad I(q) . (p - q) for every (pixel, neighbor)
    pair, with per-axis gradients from known neighbors only (central where
    both sides are known, one-sided otherwise, zero when isolated)."""

    def axis_grad(step):
        lo, hi = q - step, q + step
        lo_ok = kflat[lo]
        hi_ok = kflat[hi]
        center = vflat[q]
        g = np.where(
            (lo_ok & hi_ok)[:, :, None],
            0.5 * (vflat[hi] - vflat[lo]),
            np.where(
                hi_ok[:, :, None],
                vflat[hi] - center,
                np.where(lo_ok[:, :, None], center - vflat[lo], 0.0),
            ),
        )
        return g

    return axis_grad(1) * vx[:, :, None] + axis_grad(w2) * vy[:, :, None]


# ---------------------------------------------------------------------------
# Color clustering

def kmeans_colors(
    img: np.ndarray,
    k: int,
    seed: int,
    max_iters: int = 50,
    tol: float = 0.5,
) -> tuple[np.ndarray, np.ndarray]:
    """Cluster the image's RGB values into k colors.

    Returns (palette, labels): palette is a (k_eff, 3) float array of
    centroids, labels the per-pixel cluster index (nearest centroid by
    squared RGB distance, ties to the lowest index). Initialization is
    k-means++ seeded by `seed`; when the image has fewer than k distinct
    colors, k is reduced to that count.
    """
    require_image(img)
    if k < 2:
        raise InvalidParameter(f"k must be >= 2, got {k}")
    if max_iters < 1:
        raise InvalidParameter(f"max_iters must be >= 1, got {max_iters}")
    px = img.reshape(-1, 3).astype(np.int32)
    codes = (px[:, 0] << 16) | (px[:, 1] << 8) | px[:, 2]
    uniq, inverse, counts = np.unique(codes, return_inverse=True, return_counts=True)
    colors = np.stack([(uniq >> 16) & 255, (uniq >> 8) & 255, uniq & 255], axis=1).astype(np.float64)
    weights = counts.astype(np.float64)

    k_eff = min(k, len(colors))
    if k_eff < k:
        log.warning("image has only %d distinct colors; reducing k from %d", len(colors), k)

    rng = np.random.default_rng(seed)
    centers = _kmeans_pp(colors, weights, k_eff, rng)
    centers, assign, _ = lloyd_iterations(colors, weights, centers, max_iters, tol)
    labels = assign[inverse].reshape(img.shape[:2]).astype(np.int32)
    return centers, labels


def _kmeans_pp(colors: np.ndarray, weights: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(colors)
    centers = np.empty((k, 3), dtype=np.float64)
    chosen = np.zeros(n, dtype=bool)
    idx = int(rng.choice(n, p=weights / weights.sum()))
    centers[0] = colors[idx]
    chosen[idx] = True
    d2 = ((colors - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        mass = weights * d2
        total = mass.sum()
        if total <= 0.0:
            idx = int(np.flatnonzero(~chosen)[0])
        else:
            idx = int(rng.choice(n, p=mass / total))
        centers[j] = colors[idx]
        chosen[idx] = True
        d2 = np.minimum(d2, ((colors - centers[j]) ** 2).sum(axis=1))
    return centers


def lloyd_iterations(
    colors: np.ndarray,
    weights: np.ndarray,
    centers: np.ndarray,
    max_iters: int,
    tol: float,
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Weighted Lloyd iterations; returns (centers, assignment, inertia trace).

    The trace holds the weighted inertia after each assignment step. Empty
    clusters keep their previous centroid.
    """
    k = len(centers)
    n = len(colors)
    history: list[float] = []
    for _ in range(max_iters):
        d2 = ((colors[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        assign = np.argmin(d2, axis=1)
        history.append(float((weights * d2[np.arange(n), assign]).sum()))
        new_centers = centers.copy()
        wsum = np.bincount(assign, weights=weights, minlength=k)
        filled = wsum > 0
        for ch in range(3):
            s = np.bincount(assign, weights=weights * colors[:, ch], minlength=k)
            new_centers[filled, ch] = s[filled] / wsum[filled]
        shift = float(np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max())
        centers = new_centers
        if shift < tol:
            break
    d2 = ((colors[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    assign = np.argmin(d2, axis=1)
    return centers, assign, history


# ---------------------------------------------------------------------------
# Morphology

MORPH_OPS = ("dilate", "erode", "open", "close")


def morphology(mask: np.ndarray, op: str, se_radius: int = 1, iterations: int = 1) -> np.ndarray:
    """Binary morphology with a square (2r+1)^2 structuring element.

    open = erode then dilate, close = dilate then erode. Edges are clamped,
    so a solid region touching the border is not eaten by erosion.
    """
    m = require_mask(mask)
    if op not in MORPH_OPS:
        raise InvalidParameter(f"op must be one of {MORPH_OPS}, got {op!r}")
    if se_radius < 1:
        raise InvalidParameter(f"se_radius must be >= 1, got {se_radius}")
    if iterations < 1:
        raise InvalidParameter(f"iterations must be >= 1, got {iterations}")
    size = 2 * se_radius + 1
    out = m
    for _ in range(iterations):
        if op == "dilate":
            out = _dilate(out, size)
        elif op == "erode":
            out = _erode(out, size)
        elif op == "open":
            out = _dilate(_erode(out, size), size)
        else:
            out = _erode(_dilate(out, size), size)
    return out


def _dilate(mask: np.ndarray, size: int) -> np.ndarray:
    return ndimage.maximum_filter(mask, size=size, mode="nearest")


def _erode(mask: np.ndarray, size: int) -> np.ndarray:
    return ndimage.minimum_filter(mask, size=size, mode="nearest")
