"""Otsu threshold selection and threshold application.

Used where the stain color varies too much for color clustering: the
threshold maximizing between-class variance of the gray histogram
separates stained pixels from the bright background.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyHistogramError
from .imaging import BinaryMask, GrayImage, Histogram256

DARK_FOREGROUND = "dark"
BRIGHT_FOREGROUND = "bright"


@dataclass(frozen=True)
class OtsuResult:
    threshold: int     # smallest argmax of sigma_b2 over 0..255
    sigma_b2: float    # omega0 * omega1 * (mu0 - mu1)^2 at the threshold
    omega0: float      # mass of values <= threshold
    omega1: float      # mass of values > threshold
    mu0: float         # mean of class 0 (0.0 when empty)
    mu1: float         # mean of class 1 (0.0 when empty)


def otsu_threshold(hist: Histogram256) -> OtsuResult:
    """Scan all 256 splits and return the smallest threshold maximizing
    between-class variance. A split leaving either class empty scores 0."""
    counts = hist.bins.astype(np.int64)
    total = int(counts.sum())
    if total == 0:
        raise EmptyHistogramError("histogram has no mass")

    values = np.arange(256, dtype=np.int64)
    cum_count = np.cumsum(counts)               # class 0 = bins 0..t
    cum_weighted = np.cumsum(counts * values)
    sum_all = int(cum_weighted[-1])

    n0 = cum_count.astype(np.float64)
    n1 = (total - cum_count).astype(np.float64)
    omega0 = n0 / total
    omega1 = n1 / total
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = np.where(n0 > 0, cum_weighted / n0, 0.0)
        mu1 = np.where(n1 > 0, (sum_all - cum_weighted) / n1, 0.0)
    sigma = np.where((n0 > 0) & (n1 > 0), omega0 * omega1 * (mu0 - mu1) ** 2, 0.0)

    t = int(np.argmax(sigma))  # argmax returns the first (smallest) maximizer
    return OtsuResult(threshold=t, sigma_b2=float(sigma[t]),
                      omega0=float(omega0[t]), omega1=float(omega1[t]),
                      mu0=float(mu0[t]), mu1=float(mu1[t]))


def apply_threshold(gray: GrayImage, t: int, polarity: str = DARK_FOREGROUND) -> BinaryMask:
    """dark  -> foreground where value <= t
    bright -> foreground where value > t (pixel-wise complement of dark)."""
    if polarity == DARK_FOREGROUND:
        bits = gray.values <= t
    elif polarity == BRIGHT_FOREGROUND:
        bits = gray.values > t
    else:
        raise ValueError(f"unknown polarity {polarity!r}")
    return BinaryMask(bits)
