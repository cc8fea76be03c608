"""Camera-side geometry and color segmentation.

Covers the affine calibration between the raw camera frame and the
orthographic table frame, the linear mapping from orthographic pixels to
workspace centimeters, and HSV blob extraction of the colored beacon balls
from raster images.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import CollinearPoints, OutOfFrame

Point = tuple[float, float]

_COLLINEAR_EPS = 1e-12


@dataclass(frozen=True)
class AffineMap:
    """2D affine transform: p' = [[a00, a01], [a10, a11]] @ p + [b00, b10]."""

    a00: float
    a01: float
    a10: float
    a11: float
    b00: float
    b10: float

    def __post_init__(self):
        if self.det() == 0.0:
            raise ValueError("affine map is singular")

    def det(self) -> float:
        return self.a00 * self.a11 - self.a01 * self.a10

    def linear(self) -> np.ndarray:
        return np.array([[self.a00, self.a01], [self.a10, self.a11]])

    def offset(self) -> np.ndarray:
        return np.array([self.b00, self.b10])

    @classmethod
    def identity(cls) -> "AffineMap":
        return cls(1.0, 0.0, 0.0, 1.0, 0.0, 0.0)


def estimate_affine(src: list[Point], dst: list[Point]) -> AffineMap:
    """Fit the exact affine map sending three source points to three targets.

    Raises CollinearPoints when the source triple does not span the plane.
    """
    if len(src) != 3 or len(dst) != 3:
        raise ValueError("exactly three point correspondences required")
    s = np.asarray(src, dtype=float)
    d = np.asarray(dst, dtype=float)
    m = np.column_stack([s, np.ones(3)])
    if abs(np.linalg.det(m)) < _COLLINEAR_EPS:
        raise CollinearPoints("source points are collinear")
    # two independent 3x3 solves, one per output coordinate
    row_x = np.linalg.solve(m, d[:, 0])
    row_y = np.linalg.solve(m, d[:, 1])
    return AffineMap(row_x[0], row_x[1], row_y[0], row_y[1], row_x[2], row_y[2])


def apply_affine(m: AffineMap, p: Point) -> tuple[float, float]:
    x, y = p
    return (m.a00 * x + m.a01 * y + m.b00, m.a10 * x + m.a11 * y + m.b10)


@dataclass(frozen=True)
class WorkspaceCalib:
    """Extents of the table in orthographic pixels and in centimeters."""

    x_max_prime: float = 624.0
    y_max_prime: float = 564.0
    width: float = 52.0
    height: float = 47.0

    def __post_init__(self):
        for v in (self.x_max_prime, self.y_max_prime, self.width, self.height):
            if v <= 0:
                raise ValueError("calibration extents must be strictly positive")


def pixel_to_world(calib: WorkspaceCalib, p: Point) -> tuple[float, float]:
    """Map an orthographic-frame point to workspace centimeters.

    The workspace origin sits at the table corner shared with pixel (0, 0);
    points more than one pixel outside the calibrated extents are rejected.
    """
    x, y = p
    if not (-1.0 <= x <= calib.x_max_prime + 1.0 and -1.0 <= y <= calib.y_max_prime + 1.0):
        raise OutOfFrame(f"point {p} outside calibrated extents")
    return (x / calib.x_max_prime * calib.width, y / calib.y_max_prime * calib.height)


def world_to_pixel(calib: WorkspaceCalib, p_cm: Point) -> tuple[float, float]:
    """Inverse of pixel_to_world; used to synthesize detections and render frames."""
    x, y = p_cm
    return (x / calib.width * calib.x_max_prime, y / calib.height * calib.y_max_prime)


def save_calibration(path: str | Path, m: AffineMap, calib: WorkspaceCalib) -> None:
    doc = {
        "a": [[m.a00, m.a01], [m.a10, m.a11]],
        "b": [m.b00, m.b10],
        "x_max": calib.x_max_prime,
        "y_max": calib.y_max_prime,
        "width_cm": calib.width,
        "height_cm": calib.height,
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_calibration(path: str | Path) -> tuple[AffineMap, WorkspaceCalib]:
    doc = json.loads(Path(path).read_text())
    a, b = doc["a"], doc["b"]
    m = AffineMap(a[0][0], a[0][1], a[1][0], a[1][1], b[0], b[1])
    calib = WorkspaceCalib(doc["x_max"], doc["y_max"], doc["width_cm"], doc["height_cm"])
    return m, calib


def rgb_to_hsv(pixel: tuple[int, int, int]) -> tuple[float, float, float]:
    """Standard hexcone conversion; H in [0, 360), S and V in [0, 1].

    Gray pixels (zero saturation) report hue 0 by convention.
    """
    r, g, b = (c / 255.0 for c in pixel)
    v = max(r, g, b)
    c = v - min(r, g, b)
    if c == 0.0:
        h = 0.0
    elif v == r:
        h = 60.0 * (((g - b) / c) % 6.0)
    elif v == g:
        h = 60.0 * ((b - r) / c + 2.0)
    else:
        h = 60.0 * ((r - g) / c + 4.0)
    s = 0.0 if v == 0.0 else c / v
    return (h % 360.0, s, v)


@dataclass
class RasterImage:
    """8-bit RGB raster, row-major."""

    width: int
    height: int
    pixels: np.ndarray  # (height, width, 3) uint8

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.uint8)
        if self.pixels.shape != (self.height, self.width, 3):
            raise ValueError("pixel buffer does not match declared dimensions")

    @classmethod
    def filled(cls, width: int, height: int, rgb=(255, 255, 255)) -> "RasterImage":
        px = np.empty((height, width, 3), dtype=np.uint8)
        px[:] = rgb
        return cls(width, height, px)

    def draw_disc(self, center: Point, radius: float, rgb: tuple[int, int, int]) -> None:
        """Fill pixels whose center lies within radius of the continuous center."""
        cx, cy = center
        x0 = max(int(cx - radius) - 1, 0)
        x1 = min(int(cx + radius) + 2, self.width)
        y0 = max(int(cy - radius) - 1, 0)
        y1 = min(int(cy + radius) + 2, self.height)
        if x0 >= x1 or y0 >= y1:
            return
        xs = np.arange(x0, x1) + 0.5
        ys = np.arange(y0, y1) + 0.5
        mask = (xs[None, :] - cx) ** 2 + (ys[:, None] - cy) ** 2 <= radius**2
        self.pixels[y0:y1, x0:x1][mask] = rgb


def write_ppm(img: RasterImage, path: str | Path) -> None:
    """Write a binary P6 portable pixmap (maxval 255)."""
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.pixels.tobytes())


def read_ppm(path: str | Path) -> RasterImage:
    data = Path(path).read_bytes()
    fields: list[bytes] = []
    pos = 0
    # magic, width, height, maxval; '#' comments run to end of line
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    if fields[0] != b"P6":
        raise ValueError("not a P6 pixmap")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise ValueError("only maxval 255 supported")
    raw = np.frombuffer(data[pos : pos + width * height * 3], dtype=np.uint8)
    return RasterImage(width, height, raw.reshape(height, width, 3).copy())


@dataclass(frozen=True)
class Blob:
    color_class: str  # "orange" | "green"
    centroid: tuple[float, float]  # continuous orthographic-frame coordinates
    area: int


@dataclass(frozen=True)
class SegmentationConfig:
    """Hue windows and floors for beacon masking.

    min_area_fraction defaults to 0.1% of the image; the literal 15% area
    filter is far larger than any plausible ball blob but remains selectable.
    """

    orange_hue: tuple[float, float] = (10.0, 35.0)
    green_hue: tuple[float, float] = (85.0, 150.0)
    saturation_floor: float = 0.35
    value_floor: float = 0.25
    min_area_fraction: float = 0.001


_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])  # 4-connectivity


def _hsv_planes(pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rgb = pixels.astype(np.float64) / 255.0
    v = rgb.max(axis=2)
    c = v - rgb.min(axis=2)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    h = np.zeros_like(v)
    safe = c > 0
    cs = np.where(safe, c, 1.0)
    h = np.where(safe & (v == r), ((g - b) / cs) % 6.0, h)
    h = np.where(safe & (v == g) & (v != r), (b - r) / cs + 2.0, h)
    h = np.where(safe & (v == b) & (v != r) & (v != g), (r - g) / cs + 4.0, h)
    h = (h * 60.0) % 360.0
    s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)
    return h, s, v


def segment_beacons(img: RasterImage, cfg: SegmentationConfig = SegmentationConfig()) -> list[Blob]:
    """Extract orange/green connected components, largest first.

    Components smaller than min_area_fraction of the image are dropped.
    Centroids are means of covered pixel centers, so they live in the same
    continuous frame as the calibration extents.
    """
    h, s, v = _hsv_planes(img.pixels)
    valid = (s >= cfg.saturation_floor) & (v >= cfg.value_floor)
    min_area = cfg.min_area_fraction * img.width * img.height
    blobs: list[Blob] = []
    for color, (lo, hi) in (("orange", cfg.orange_hue), ("green", cfg.green_hue)):
        mask = valid & (h >= lo) & (h <= hi)
        labels, count = ndimage.label(mask, structure=_CROSS)
        for idx in range(1, count + 1):
            ys, xs = np.nonzero(labels == idx)
            if len(xs) < min_area:
                continue
            centroid = (float(xs.mean()) + 0.5, float(ys.mean()) + 0.5)
            blobs.append(Blob(color, centroid, int(len(xs))))
    blobs.sort(key=lambda b: -b.area)
    return blobs
