"""Trajectory quality measures.

All functions take an (N, 2) array-like of planar positions in cm. Derivative
statistics additionally need the uniform sampling interval.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .errors import DegeneratePath, NonuniformSampling, TooFewSamples


@dataclass
class MetricsBundle:
    err_x: float
    err_y: float
    err_x_std: float
    err_y_std: float
    path_length: float
    r2: float
    accel_mean: float
    accel_std: float
    jerk_mean: float
    jerk_std: float
    d2_variance: float
    fractal_slope: float

    def to_json(self) -> dict:
        return {k: float(v) for k, v in asdict(self).items()}


def _pts(samples) -> np.ndarray:
    p = np.asarray(samples, dtype=float)
    if p.ndim != 2 or p.shape[1] != 2:
        raise ValueError("expected an (N, 2) sample array")
    return p


def path_length(samples) -> float:
    """Sum of Euclidean segment lengths."""
    p = _pts(samples)
    if len(p) < 2:
        raise TooFewSamples("path length needs at least two samples")
    return float(np.sum(np.hypot(*np.diff(p, axis=0).T)))


def straightness_r2(samples) -> float:
    """Coefficient of determination of the path against its best straight line.

    The path is rotated so its major principal axis lies at 45 degrees and the
    rotated coordinates are regressed against each other; this reduces to
    ((l1 - l2) / (l1 + l2))^2 in the covariance eigenvalues, is exactly 1 for
    collinear samples, and is invariant to rotation and uniform scaling.
    """
    p = _pts(samples)
    if len(p) < 3:
        raise TooFewSamples("straightness needs at least three samples")
    centered = p - p.mean(axis=0)
    cov = centered.T @ centered
    eig = np.linalg.eigvalsh(cov)
    total = float(eig.sum())
    if total <= 0.0:
        raise DegeneratePath("all samples coincide")
    r = (eig[1] - eig[0]) / total
    return float(min(max(r * r, 0.0), 1.0))


def derivative_stats(samples, dt: float) -> dict[str, float]:
    """Pooled mean and population std of acceleration and jerk per axis.

    Second and third central differences of position over the interior
    samples; both axes pooled into one population.
    """
    p = _pts(samples)
    if len(p) < 4:
        raise TooFewSamples("derivative statistics need at least four samples")
    if dt <= 0:
        raise NonuniformSampling("sampling interval must be positive")
    accel = (p[2:] - 2 * p[1:-1] + p[:-2]) / dt**2
    if len(p) >= 5:
        jerk = (p[4:] - 2 * p[3:-1] + 2 * p[1:-3] - p[:-4]) / (2 * dt**3)
    else:  # exactly four samples: single one-sided third difference
        jerk = (p[3:] - 3 * p[2:3] + 3 * p[1:2] - p[0:1]) / dt**3
    return {
        "accel_mean": float(accel.mean()),
        "accel_std": float(accel.std()),
        "jerk_mean": float(jerk.mean()),
        "jerk_std": float(jerk.std()),
    }


def second_derivative_variance(samples) -> float:
    """Variance of the pooled per-axis second differences, in sample units.

    Index-domain differences (no dt scaling); invariant under global
    translation of the path.
    """
    p = _pts(samples)
    if len(p) < 4:
        raise TooFewSamples("second-derivative variance needs at least four samples")
    d2 = p[2:] - 2 * p[1:-1] + p[:-2]
    return float(d2.var())


def fractal_slope(samples, n_scales: int = 50) -> float:
    """Slope of log box-count versus log box-size over the sampled polyline.

    The polyline (segments, not just vertices) is walked at a quarter of each
    box size and occupied grid cells are counted at n_scales geometrically
    spaced sizes spanning [extent/512, extent/2]. A straight path scores near
    -1, an area-filling one near -2.
    """
    p = _pts(samples)
    lo = p.min(axis=0)
    extent = float((p.max(axis=0) - lo).max())
    if len(p) < 2 or extent <= 0.0:
        raise DegeneratePath("box counting needs at least two distinct points")
    seg_a = p[:-1]
    seg_d = p[1:] - p[:-1]
    seg_len = np.hypot(seg_d[:, 0], seg_d[:, 1])
    sizes = extent / 2.0 * np.geomspace(1.0, 1.0 / 256.0, n_scales)
    log_s = np.log(sizes)
    log_n = np.empty(n_scales)
    for i, s in enumerate(sizes):
        counts = np.maximum((seg_len / (s / 4.0)).astype(int) + 1, 2)
        pts = [a + np.linspace(0.0, 1.0, n)[:, None] * d for a, d, n in zip(seg_a, seg_d, counts)]
        cells = np.floor((np.vstack(pts) - lo) / s).astype(np.int64)
        log_n[i] = np.log(len(np.unique(cells[:, 0] * (2**32) + cells[:, 1])))
    return float(np.polyfit(log_s, log_n, 1)[0])


def positional_error(finals, target) -> dict[str, float]:
    """Per-axis absolute reach errors over repeats, as mean and population std."""
    f = _pts(finals)
    if len(f) < 1:
        raise TooFewSamples("positional error needs at least one repeat")
    err = np.abs(f - np.asarray(target, dtype=float))
    return {
        "err_x": float(err[:, 0].mean()),
        "err_x_std": float(err[:, 0].std()),
        "err_y": float(err[:, 1].mean()),
        "err_y_std": float(err[:, 1].std()),
    }


def bundle_for_run(positions, dt: float, final_p, target) -> MetricsBundle:
    """All single-run measures against one target; repeat aggregation happens upstream."""
    err = positional_error([final_p], target)
    deriv = derivative_stats(positions, dt)
    return MetricsBundle(
        err_x=err["err_x"],
        err_y=err["err_y"],
        err_x_std=err["err_x_std"],
        err_y_std=err["err_y_std"],
        path_length=path_length(positions),
        r2=straightness_r2(positions),
        accel_mean=deriv["accel_mean"],
        accel_std=deriv["accel_std"],
        jerk_mean=deriv["jerk_mean"],
        jerk_std=deriv["jerk_std"],
        d2_variance=second_derivative_variance(positions),
        fractal_slope=fractal_slope(positions),
    )
