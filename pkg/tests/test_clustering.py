import numpy as np
import pytest

from bactoseg.clustering import (assignment_to_mask, kmeans_rgb, select_foreground_clusters,
                                 wcss_of)
from bactoseg.errors import InvalidClusterIndexError, TooFewDistinctColorsError
from bactoseg.imaging import RasterImage

LUMA = np.array([0.299, 0.587, 0.114])


def brute_force_wcss_k2(points: np.ndarray) -> float:
    """Minimal WCSS over every 2-partition of the points."""
    n = len(points)
    best = np.inf
    for code in range(1, 2 ** n - 1):
        part = np.array([(code >> i) & 1 for i in range(n)], dtype=bool)
        w = 0.0
        for side in (part, ~part):
            group = points[side]
            w += ((group - group.mean(axis=0)) ** 2).sum()
        best = min(best, w)
    return best


def test_k1_centroid_is_mean(random_image):
    img = random_image(3, width=16, height=16)
    model = kmeans_rgb(img, 1, seed=0)
    points = img.pixels.reshape(-1, 3).astype(np.float64)
    assert np.allclose(model.centroids[0], points.mean(axis=0))
    # wcss == N * total color variance (population, summed over channels)
    expected = len(points) * points.var(axis=0).sum()
    assert model.wcss == pytest.approx(expected, rel=1e-12)


def test_two_color_image_recovered_exactly():
    px = np.zeros((2, 4, 3), dtype=np.uint8)
    px[:, 2:] = 255
    model = kmeans_rgb(RasterImage(px), 2, seed=9)
    assert model.wcss == 0.0
    assert np.array_equal(model.centroids, [[0.0, 0.0, 0.0], [255.0, 255.0, 255.0]])


def test_six_pixel_global_optimum_any_seed():
    px = np.array([[(10, 10, 10)] * 3 + [(200, 200, 200)] * 3], dtype=np.uint8)
    img = RasterImage(px)
    points = px.reshape(-1, 3).astype(np.float64)
    optimum = brute_force_wcss_k2(points)
    for seed in range(5):
        model = kmeans_rgb(img, 2, seed=seed)
        assert model.wcss == pytest.approx(optimum, abs=1e-9)


def test_wcss_monotone_over_iterations(random_image):
    img = random_image(21)
    trace = []
    kmeans_rgb(img, 3, seed=4, on_iteration=lambda it, w: trace.append(w))
    assert len(trace) >= 1
    assert all(a >= b - 1e-9 for a, b in zip(trace, trace[1:]))


def test_determinism(random_image):
    img = random_image(33)
    a = kmeans_rgb(img, 3, seed=77)
    b = kmeans_rgb(img, 3, seed=77)
    assert np.array_equal(a.centroids, b.centroids)
    assert np.array_equal(a.assignment, b.assignment)
    assert a.wcss == b.wcss and a.iterations == b.iterations


def test_centroids_sorted_by_luma(random_image):
    model = kmeans_rgb(random_image(5), 3, seed=2)
    lumas = model.centroids @ LUMA
    assert (np.diff(lumas) >= 0).all()


def test_assignment_is_nearest_with_low_index_ties(random_image):
    img = random_image(13, width=8, height=8)
    model = kmeans_rgb(img, 3, seed=1)
    points = img.pixels.reshape(-1, 3).astype(np.float64)
    d2 = ((points[:, None, :] - model.centroids[None]) ** 2).sum(axis=2)
    assert np.array_equal(model.assignment.reshape(-1), np.argmin(d2, axis=1))


def test_well_separated_centroids_match_true_means():
    rng = np.random.default_rng(0)
    h, w = 16, 16
    labels = rng.integers(0, 2, size=(h, w))
    base = np.array([[30, 30, 30], [220, 220, 220]], dtype=np.float64)
    px = (base[labels] + rng.integers(-3, 4, size=(h, w, 3))).astype(np.uint8)
    img = RasterImage(px)
    model = kmeans_rgb(img, 2, seed=5, tol=1e-6)
    points = px.reshape(-1, 3).astype(np.float64)
    for j, mean in enumerate([points[labels.reshape(-1) == 0].mean(axis=0),
                              points[labels.reshape(-1) == 1].mean(axis=0)]):
        assert np.abs(model.centroids[j] - mean).max() < 0.5


def test_too_few_distinct_colors():
    img = RasterImage(np.zeros((4, 4, 3), dtype=np.uint8))
    with pytest.raises(TooFewDistinctColorsError):
        kmeans_rgb(img, 2, seed=0)


def test_select_darkest_cluster():
    px = np.zeros((1, 8, 3), dtype=np.uint8)
    px[0, 4:] = 200
    model = kmeans_rgb(RasterImage(px), 2, seed=0)
    assert select_foreground_clusters(model, "darkest") == {0}


def test_select_manual_passthrough_and_validation(random_image):
    model = kmeans_rgb(random_image(9), 3, seed=0)
    assert select_foreground_clusters(model, [0, 2]) == {0, 2}
    with pytest.raises(InvalidClusterIndexError):
        select_foreground_clusters(model, [3])


def test_assignment_to_mask():
    px = np.zeros((2, 3, 3), dtype=np.uint8)
    px[:, 2] = 255
    model = kmeans_rgb(RasterImage(px), 2, seed=0)

    full = assignment_to_mask(model, [0, 1])
    assert full.bits.all()

    dark = assignment_to_mask(model, [0])
    assert np.array_equal(dark.bits, px[..., 0] == 0)

    with pytest.raises(InvalidClusterIndexError):
        assignment_to_mask(model, [])


def test_wcss_of_matches_direct_sum(random_image):
    img = random_image(41, width=6, height=5)
    model = kmeans_rgb(img, 2, seed=3)
    # independent recomputation pixel by pixel
    expected = 0.0
    flat = img.pixels.reshape(-1, 3).astype(float)
    for i, cl in enumerate(model.assignment.reshape(-1)):
        diff = flat[i] - model.centroids[cl]
        expected += float((diff * diff).sum())
    assert wcss_of(img, model.centroids, model.assignment) == pytest.approx(expected, rel=1e-12)


def test_wcss_of_single_pixel_345():
    img = RasterImage(np.zeros((1, 1, 3), dtype=np.uint8))
    assert wcss_of(img, np.array([[3.0, 4.0, 0.0]]), np.array([0])) == 25.0


def test_wcss_of_zero_at_own_color():
    img = RasterImage(np.full((1, 1, 3), 17, dtype=np.uint8))
    assert wcss_of(img, np.array([[17.0, 17.0, 17.0]]), np.array([0])) == 0.0
