"""Taxel-grid contact models for a cylinder resting on the sensor plane.

The sensing array is a rows x cols grid of taxels on the robot's back.  A
rigid cylinder lying on the plane touches it along a line segment; a taxel
fires when that segment crosses the taxel's collision rectangle.  Three
rectangle choices give the three contact models:

* ``intersect`` -- the physical electrode-overlap rectangle.  Rectangles of
  adjacent taxels never overlap, so this model cannot reproduce the signal
  coupling seen on the real sensor.
* ``expanded``  -- an enlarged, calibrated rectangle.  Adjacent rectangles
  overlap, so a contact near a taxel edge also fires the neighbour.
* ``filtered``  -- the intersect map blurred with a 3x3 Gaussian kernel and
  re-thresholded.

Coordinates: x runs along the robot's forward axis (rows), y lateral
(columns).  Grid dimensions are millimetres; poses are metres.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

GRAVITY = 9.81  # m/s^2

_MM_PER_M = 1000.0


@dataclass(frozen=True)
class TaxelGrid:
    """Geometry of the sensing array (all lengths in mm)."""

    rows: int = 17
    cols: int = 13
    coverage_x: float = 250.0
    coverage_y: float = 180.0
    pitch_x: float = 14.3
    pitch_y: float = 12.8
    intersect_w: float = 11.3
    intersect_h: float = 10.5
    expanded_w: float = 18.3
    expanded_h: float = 17.5

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid needs at least one taxel per axis")
        if self.rows * self.pitch_x > self.coverage_x + self.pitch_x:
            raise ValueError("rows do not fit the x coverage")
        if self.cols * self.pitch_y > self.coverage_y + self.pitch_y:
            raise ValueError("cols do not fit the y coverage")
        if not (self.expanded_w > self.pitch_x and self.expanded_h > self.pitch_y):
            raise ValueError("expanded rectangles must overlap adjacent taxels")
        if not (self.intersect_w < self.pitch_x and self.intersect_h < self.pitch_y):
            raise ValueError("intersection rectangles must not overlap")

    @property
    def centers_x(self) -> np.ndarray:
        """Row center x positions in mm, grid centered on the origin."""
        return (np.arange(self.rows) - (self.rows - 1) / 2.0) * self.pitch_x

    @property
    def centers_y(self) -> np.ndarray:
        return (np.arange(self.cols) - (self.cols - 1) / 2.0) * self.pitch_y

    def half_extents(self, variant: str) -> tuple[float, float]:
        """Collision-rectangle half width/height in mm for a model variant."""
        if variant == "intersect" or variant == "filtered":
            return self.intersect_w / 2.0, self.intersect_h / 2.0
        if variant == "expanded":
            return self.expanded_w / 2.0, self.expanded_h / 2.0
        raise ValueError(f"unknown contact model variant: {variant!r}")


@dataclass(frozen=True)
class CylinderPose:
    """Planar pose of the transported cylinder in the sensor frame (m, rad, kg)."""

    x: float = 0.0
    y: float = 0.0
    yaw: float = 0.0
    radius: float = 0.05
    length: float = 0.3
    mass: float = 1.0

    def __post_init__(self):
        if not 0.015 <= self.radius <= 0.09:
            raise ValueError(f"radius {self.radius} outside accepted [0.015, 0.09] m")
        if self.length <= 0.0:
            raise ValueError("length must be positive")
        if self.mass < 0.0:
            raise ValueError("mass must be non-negative")


@dataclass(frozen=True)
class ContactModel:
    variant: str = "expanded"
    kernel_sigma: float = 1.0
    threshold: float = 0.25

    def __post_init__(self):
        if self.variant not in ("intersect", "filtered", "expanded"):
            raise ValueError(f"unknown contact model variant: {self.variant!r}")
        if self.variant == "filtered" and not 0.0 < self.threshold < 1.0:
            raise ValueError("filtered threshold must lie in (0, 1)")
        if self.variant == "filtered" and self.kernel_sigma <= 0.0:
            raise ValueError("kernel sigma must be positive")

    @classmethod
    def intersect(cls) -> "ContactModel":
        return cls(variant="intersect")

    @classmethod
    def expanded(cls) -> "ContactModel":
        return cls(variant="expanded")

    @classmethod
    def filtered(cls, kernel_sigma: float = 1.0, threshold: float = 0.25) -> "ContactModel":
        return cls(variant="filtered", kernel_sigma=kernel_sigma, threshold=threshold)


@dataclass
class ForceMap:
    """Per-taxel normal forces (N).  ``no_support`` marks a loaded cylinder
    that touches no taxel, e.g. fully outside the coverage."""

    values: np.ndarray
    no_support: bool = False


def contact_segment(pose: CylinderPose) -> tuple[np.ndarray, np.ndarray]:
    """Contact line of the resting cylinder: endpoints in the sensor frame (m)."""
    direction = np.array([np.cos(pose.yaw), np.sin(pose.yaw)])
    center = np.array([pose.x, pose.y])
    half = 0.5 * pose.length * direction
    return center - half, center + half


def _segment_hits_rects(
    p0_mm: np.ndarray,
    p1_mm: np.ndarray,
    centers_x: np.ndarray,
    centers_y: np.ndarray,
    half_w: float,
    half_h: float,
) -> np.ndarray:
    """Exact segment/rectangle intersection, vectorised over the taxel grid.

    Liang-Barsky clipping of the segment (param t in [0, 1]) against each
    closed axis-aligned rectangle; touching the boundary counts as a hit.
    """
    dx = p1_mm[0] - p0_mm[0]
    dy = p1_mm[1] - p0_mm[1]

    lo_x = (centers_x - half_w)[:, None]  # (rows, 1)
    hi_x = (centers_x + half_w)[:, None]
    lo_y = (centers_y - half_h)[None, :]  # (1, cols)
    hi_y = (centers_y + half_h)[None, :]

    def axis_interval(d, p, lo, hi):
        if abs(d) < 1e-12:
            inside = (lo <= p) & (p <= hi)
            t_lo = np.where(inside, -np.inf, np.inf)
            t_hi = np.where(inside, np.inf, -np.inf)
            return t_lo, t_hi
        t_a = (lo - p) / d
        t_b = (hi - p) / d
        return np.minimum(t_a, t_b), np.maximum(t_a, t_b)

    tx_lo, tx_hi = axis_interval(dx, p0_mm[0], lo_x, hi_x)
    ty_lo, ty_hi = axis_interval(dy, p0_mm[1], lo_y, hi_y)

    t_enter = np.maximum(np.maximum(tx_lo, ty_lo), 0.0)
    t_exit = np.minimum(np.minimum(tx_hi, ty_hi), 1.0)
    return t_enter <= t_exit


def _segment_hits_rects_batch(
    p0_mm: np.ndarray,
    p1_mm: np.ndarray,
    centers_x: np.ndarray,
    centers_y: np.ndarray,
    half_w: float,
    half_h: float,
) -> np.ndarray:
    """Vectorised over n segments: (n, 2) endpoint arrays -> (n, rows, cols).

    Same arithmetic as the single-segment routine, elementwise over the batch,
    so results match it bit for bit.
    """
    d = p1_mm - p0_mm  # (n, 2)
    lo_x = (centers_x - half_w)[None, :, None]
    hi_x = (centers_x + half_w)[None, :, None]
    lo_y = (centers_y - half_h)[None, None, :]
    hi_y = (centers_y + half_h)[None, None, :]

    def axis_interval(d_ax, p_ax, lo, hi):
        d_ax = d_ax[:, None, None]
        p_ax = p_ax[:, None, None]
        degenerate = np.abs(d_ax) < 1e-12
        with np.errstate(divide="ignore", invalid="ignore"):
            t_a = (lo - p_ax) / d_ax
            t_b = (hi - p_ax) / d_ax
        t_lo = np.minimum(t_a, t_b)
        t_hi = np.maximum(t_a, t_b)
        inside = (lo <= p_ax) & (p_ax <= hi)
        t_lo = np.where(degenerate, np.where(inside, -np.inf, np.inf), t_lo)
        t_hi = np.where(degenerate, np.where(inside, np.inf, -np.inf), t_hi)
        return t_lo, t_hi

    tx_lo, tx_hi = axis_interval(d[:, 0], p0_mm[:, 0], lo_x, hi_x)
    ty_lo, ty_hi = axis_interval(d[:, 1], p0_mm[:, 1], lo_y, hi_y)
    t_enter = np.maximum(np.maximum(tx_lo, ty_lo), 0.0)
    t_exit = np.minimum(np.minimum(tx_hi, ty_hi), 1.0)
    return t_enter <= t_exit


def gaussian_kernel_3x3(sigma: float) -> np.ndarray:
    """Normalised 3x3 Gaussian kernel."""
    g = np.exp(-np.array([1.0, 0.0, 1.0]) ** 2 / (2.0 * sigma**2))
    k = np.outer(g, g)
    return k / k.sum()


def active_taxels(grid: TaxelGrid, pose: CylinderPose, model: ContactModel) -> np.ndarray:
    """Binary rows x cols activation map of the cylinder under a contact model.

    A pose fully outside the coverage simply yields an all-zero map.
    """
    p0, p1 = contact_segment(pose)
    half_w, half_h = grid.half_extents(model.variant)
    hits = _segment_hits_rects(
        p0 * _MM_PER_M, p1 * _MM_PER_M, grid.centers_x, grid.centers_y, half_w, half_h
    )
    if model.variant == "filtered":
        blurred = ndimage.convolve(
            hits.astype(np.float64), gaussian_kernel_3x3(model.kernel_sigma), mode="constant"
        )
        hits = blurred > model.threshold
    return hits.astype(np.uint8)


def active_taxels_batch(grid: TaxelGrid, poses_xyyaw: np.ndarray, length: float,
                        model: ContactModel) -> np.ndarray:
    """Activation maps for n planar poses at once: (n, 3) -> (n, rows, cols).

    Bit-identical to mapping :func:`active_taxels` over the poses; used to
    keep long replays cheap.
    """
    poses_xyyaw = np.asarray(poses_xyyaw, dtype=np.float64)
    center = poses_xyyaw[:, :2]
    direction = np.stack(
        [np.cos(poses_xyyaw[:, 2]), np.sin(poses_xyyaw[:, 2])], axis=1
    )
    half = 0.5 * length * direction
    half_w, half_h = grid.half_extents(model.variant)
    hits = _segment_hits_rects_batch(
        (center - half) * _MM_PER_M, (center + half) * _MM_PER_M,
        grid.centers_x, grid.centers_y, half_w, half_h,
    )
    if model.variant == "filtered":
        kernel = gaussian_kernel_3x3(model.kernel_sigma)[None, :, :]
        blurred = ndimage.convolve(hits.astype(np.float64), kernel, mode="constant")
        hits = blurred > model.threshold
    return hits.astype(np.uint8)


def force_from_active(active: np.ndarray, mass: float) -> ForceMap:
    """Spread ``mass``'s weight uniformly over an activation map."""
    values = np.zeros(active.shape)
    n_active = int(active.sum())
    if n_active == 0:
        return ForceMap(values=values, no_support=mass > 0.0)
    values[active.astype(bool)] = mass * GRAVITY / n_active
    return ForceMap(values=values)


def force_map(grid: TaxelGrid, pose: CylinderPose, model: ContactModel) -> ForceMap:
    """Distribute the cylinder weight uniformly over the active taxels."""
    return force_from_active(active_taxels(grid, pose, model), pose.mass)


def ascii_map(mask: np.ndarray) -> str:
    """Render a binary map as '#'/'.' text, forward (+x, row 0 last) at the top."""
    rows = ["".join("#" if v else "." for v in row) for row in np.asarray(mask)[::-1]]
    return "\n".join(rows)


def map_to_csv_row(mask: np.ndarray) -> list[int]:
    return [int(v) for v in np.asarray(mask).reshape(-1)]
