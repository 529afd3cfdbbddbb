"""k-means over RGB pixels: seeded k-means++ init plus Lloyd iterations.

Stained bacteria share a color that is well separated from the bright
background, so their pixels form a tight cluster in RGB space; labeling
that cluster segments them. Everything here is deterministic in
(image, k, seed, max_iter, tol).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import InvalidClusterIndexError, TooFewDistinctColorsError
from .imaging import BinaryMask, RasterImage

DEFAULT_TOL = 0.5
DEFAULT_MAX_ITER = 100

_LUMA = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """Fitted clustering of an image's pixels.

    centroids are sorted ascending by luma so cluster indices are stable
    across runs; assignment maps each pixel to a nearest centroid with
    ties broken toward the lowest index.
    """

    k: int
    centroids: np.ndarray   # (k, 3) float64, luma-ascending
    assignment: np.ndarray  # (h, w) int32
    wcss: float
    iterations: int

    def centroid_lumas(self) -> np.ndarray:
        return self.centroids @ _LUMA


def kmeans_rgb(img: RasterImage, k: int, seed: int = 0,
               max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_TOL,
               on_iteration: Optional[Callable[[int, float], None]] = None) -> ClusterModel:
    """Cluster the image's RGB pixels into k groups.

    on_iteration, when given, receives (iteration_index, wcss) after each
    assignment step; the wcss sequence is non-increasing.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    if tol < 0:
        raise ValueError(f"tol must be non-negative, got {tol}")

    h, w = img.height, img.width
    points = img.pixels.reshape(-1, 3).astype(np.float64)
    n_distinct = _distinct_color_count(img.pixels)
    if k > n_distinct:
        raise TooFewDistinctColorsError(
            f"k={k} but image has only {n_distinct} distinct colors")

    rng = np.random.default_rng(seed)
    centroids = _kmeans_plusplus(points, k, rng)

    assignment = np.zeros(len(points), dtype=np.int32)
    iterations = 0
    for it in range(1, max_iter + 1):
        iterations = it
        d2 = _sq_dists(points, centroids)
        assignment = np.argmin(d2, axis=1).astype(np.int32)
        wcss = float(d2[np.arange(len(points)), assignment].sum())
        if on_iteration is not None:
            on_iteration(it, wcss)

        new_centroids = centroids.copy()
        for j in range(k):
            members = assignment == j
            if members.any():
                new_centroids[j] = points[members].mean(axis=0)
        new_centroids = _reseed_empty(points, new_centroids, assignment)

        movement = float(np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max())
        centroids = new_centroids
        if movement < tol:
            break

    # Canonical order plus one last assignment pass so the tie rule holds
    # under the final indexing.
    order = np.lexsort((centroids[:, 2], centroids[:, 1], centroids[:, 0],
                        centroids @ _LUMA))
    centroids = centroids[order]
    d2 = _sq_dists(points, centroids)
    assignment = np.argmin(d2, axis=1).astype(np.int32)
    wcss = float(d2[np.arange(len(points)), assignment].sum())

    return ClusterModel(k=k, centroids=centroids,
                        assignment=assignment.reshape(h, w),
                        wcss=wcss, iterations=iterations)


def _distinct_color_count(pixels: np.ndarray) -> int:
    packed = (pixels[..., 0].astype(np.int32) << 16 |
              pixels[..., 1].astype(np.int32) << 8 |
              pixels[..., 2].astype(np.int32))
    return len(np.unique(packed))


def _sq_dists(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centroids[None, :, :]
    return (diff * diff).sum(axis=2)


def _kmeans_plusplus(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Seed centroids with probability proportional to squared distance."""
    n = len(points)
    centroids = np.empty((k, 3), dtype=np.float64)
    centroids[0] = points[rng.integers(n)]
    if k == 1:
        return centroids
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        cum = np.cumsum(d2)
        # total > 0 because k <= number of distinct colors
        pick = np.searchsorted(cum, rng.random() * cum[-1], side="right")
        centroids[j] = points[min(pick, n - 1)]
        d2 = np.minimum(d2, ((points - centroids[j]) ** 2).sum(axis=1))
    return centroids


def _reseed_empty(points: np.ndarray, centroids: np.ndarray,
                  assignment: np.ndarray) -> np.ndarray:
    """Move each empty cluster's centroid onto the pixel farthest from its own."""
    counts = np.bincount(assignment, minlength=len(centroids))
    empty = np.flatnonzero(counts == 0)
    if len(empty) == 0:
        return centroids
    d2 = ((points - centroids[assignment]) ** 2).sum(axis=1)
    for j in empty:
        far = int(np.argmax(d2))
        centroids[j] = points[far]
        d2 = np.minimum(d2, ((points - centroids[j]) ** 2).sum(axis=1))
    return centroids


def select_foreground_clusters(model: ClusterModel,
                               strategy: str | Iterable[int] = "darkest") -> frozenset[int]:
    """Pick which clusters count as bacteria.

    "darkest" takes the lowest-luma centroid (gram stains render bacteria
    darker than the background); an explicit index collection passes
    through after validation.
    """
    if isinstance(strategy, str):
        if strategy != "darkest":
            raise ValueError(f"unknown strategy {strategy!r}")
        return frozenset({int(np.argmin(model.centroid_lumas()))})
    indices = frozenset(int(i) for i in strategy)
    _validate_indices(indices, model.k)
    return indices


def assignment_to_mask(model: ClusterModel, fg: Iterable[int]) -> BinaryMask:
    """Mask of pixels whose cluster is in the foreground set."""
    fg = frozenset(int(i) for i in fg)
    _validate_indices(fg, model.k)
    bits = np.isin(model.assignment, sorted(fg))
    return BinaryMask(bits)


def _validate_indices(indices: frozenset[int], k: int) -> None:
    if not indices:
        raise InvalidClusterIndexError("foreground cluster set is empty")
    bad = [i for i in indices if i < 0 or i >= k]
    if bad:
        raise InvalidClusterIndexError(f"cluster indices {bad} out of range for k={k}")


def wcss_of(img: RasterImage, centroids: np.ndarray, assignment: np.ndarray) -> float:
    """Sum of squared RGB distances from each pixel to its assigned centroid."""
    points = img.pixels.reshape(-1, 3).astype(np.float64)
    assigned = np.asarray(assignment).reshape(-1)
    if len(assigned) != len(points):
        raise ValueError("assignment does not cover every pixel")
    diff = points - np.asarray(centroids, dtype=np.float64)[assigned]
    return float((diff * diff).sum())
