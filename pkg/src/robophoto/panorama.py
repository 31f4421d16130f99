"""Equirectangular <-> perspective projection for panorama crops.

Shared angle conventions (used by every module in this package):
  - World frame: +z forward, +x right, +y up.
  - Yaw is positive clockwise viewed from above; yaw 0 looks along +z.
  - Longitude lam = atan2(x, z) in [-pi, pi]; latitude phi = asin(y).
  - Equirectangular pixel x = (lam + pi) / (2 pi) * W, so +z maps to the
    image center column; y = (pi/2 - phi) / pi * H, so the zenith maps to
    the top row.

Pixel (u, v) addresses continuous image coordinates with the pixel grid
covering [0, W] x [0, H]; the center of integer pixel (i, j) sits at
(i + 0.5, j + 0.5).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class PerspectiveCamera:
    """Pinhole camera: horizontal FOV, frame size, and a heading."""

    hfov_rad: float
    width_px: int
    height_px: int
    yaw_rad: float = 0.0
    pitch_rad: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 < self.hfov_rad < math.pi):
            raise ValueError(f"hfov_rad must lie in (0, pi), got {self.hfov_rad}")
        if self.width_px < 2 or self.height_px < 2:
            raise ValueError("camera frame must be at least 2x2 pixels")
        if self.pitch_rad != 0.0:
            raise ValueError("non-zero pitch is not supported")

    @property
    def focal_px(self) -> float:
        return (self.width_px / 2.0) / math.tan(self.hfov_rad / 2.0)

    def with_yaw(self, yaw_rad: float) -> "PerspectiveCamera":
        return replace(self, yaw_rad=yaw_rad)


class EquirectImage:
    """Full-sphere equirectangular RGB image (width = 2 x height)."""

    def __init__(self, pixels: np.ndarray):
        pixels = np.asarray(pixels, dtype=np.uint8)
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise ValueError("pixels must have shape (H, W, 3)")
        h, w = pixels.shape[:2]
        if w != 2 * h:
            raise ValueError(f"equirectangular image needs width = 2*height, got {w}x{h}")
        if w < 8:
            raise ValueError("width must be at least 8 px")
        self.pixels = pixels

    @property
    def width_px(self) -> int:
        return self.pixels.shape[1]

    @property
    def height_px(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def load_ppm(cls, path) -> "EquirectImage":
        return cls(load_ppm(path))

    def save_ppm(self, path) -> None:
        save_ppm(path, self.pixels)


def _rotate_yaw(x: np.ndarray, z: np.ndarray, yaw_rad: float):
    """Rotate camera-frame (x, z) into the world by a clockwise yaw."""
    c, s = math.cos(yaw_rad), math.sin(yaw_rad)
    return x * c + z * s, -x * s + z * c


def pixel_to_ray(cam: PerspectiveCamera, u: float, v: float) -> np.ndarray:
    """Unit world-frame direction of the ray through continuous pixel (u, v).

    The focal length is f = (width/2) / tan(hfov/2); the vertical FOV
    follows from f and the frame height.
    """
    if not (math.isfinite(u) and math.isfinite(v)):
        raise ValueError(f"pixel coordinates must be finite, got ({u}, {v})")
    if not (0.0 <= u <= cam.width_px and 0.0 <= v <= cam.height_px):
        raise ValueError(f"pixel ({u}, {v}) outside frame {cam.width_px}x{cam.height_px}")
    f = cam.focal_px
    xc = (u - cam.width_px / 2.0) / f
    yc = (cam.height_px / 2.0 - v) / f
    zc = 1.0
    n = math.sqrt(xc * xc + yc * yc + zc * zc)
    xc, yc, zc = xc / n, yc / n, zc / n
    xw, zw = _rotate_yaw(np.float64(xc), np.float64(zc), cam.yaw_rad)
    return np.array([xw, yc, zw], dtype=np.float64)


def ray_to_pixel(cam: PerspectiveCamera, direction: np.ndarray) -> tuple[float, float]:
    """Inverse of pixel_to_ray for directions in front of the camera."""
    x, y, z = (float(c) for c in direction)
    c, s = math.cos(cam.yaw_rad), math.sin(cam.yaw_rad)
    xc = x * c - z * s
    zc = x * s + z * c
    if zc <= 0.0:
        raise ValueError("direction is behind the camera")
    f = cam.focal_px
    u = cam.width_px / 2.0 + f * xc / zc
    v = cam.height_px / 2.0 - f * y / zc
    return u, v


def ray_to_equirect(direction: np.ndarray, width_px: int, height_px: int) -> tuple[float, float]:
    """Map a unit direction to continuous equirectangular pixel coordinates.

    Output lies in [0, W] x [0, H]. The poles land on y = 0 or y = H with
    x fixed by the atan2(0, 0) = 0 convention.
    """
    x, y, z = (float(c) for c in direction)
    lam = math.atan2(x, z)
    phi = math.asin(max(-1.0, min(1.0, y)))
    px = (lam + math.pi) / (2.0 * math.pi) * width_px
    py = (math.pi / 2.0 - phi) / math.pi * height_px
    return px, py


def equirect_to_ray(x_px: float, y_px: float, width_px: int, height_px: int) -> np.ndarray:
    """Unit direction for a continuous equirectangular pixel coordinate."""
    lam = x_px / width_px * 2.0 * math.pi - math.pi
    phi = math.pi / 2.0 - y_px / height_px * math.pi
    cphi = math.cos(phi)
    return np.array([cphi * math.sin(lam), math.sin(phi), cphi * math.cos(lam)], dtype=np.float64)


def _rays_for_frame(cam: PerspectiveCamera) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """World-frame ray components for every output pixel center, vectorized."""
    f = cam.focal_px
    us = (np.arange(cam.width_px, dtype=np.float64) + 0.5 - cam.width_px / 2.0) / f
    vs = (cam.height_px / 2.0 - (np.arange(cam.height_px, dtype=np.float64) + 0.5)) / f
    xc, yc = np.meshgrid(us, vs)
    zc = np.ones_like(xc)
    n = np.sqrt(xc * xc + yc * yc + 1.0)
    xc, yc, zc = xc / n, yc / n, zc / n
    xw, zw = _rotate_yaw(xc, zc, cam.yaw_rad)
    return xw, yc, zw


def bilinear_sample(pixels: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Sample an (H, W, 3) image at continuous coordinates.

    Wraps horizontally (equirectangular topology is a cylinder) and clamps
    vertically. Coordinates follow the pixel-center convention above.
    """
    h, w = pixels.shape[:2]
    gx = x - 0.5
    gy = np.clip(y - 0.5, 0.0, h - 1.0)
    x0 = np.floor(gx).astype(np.int64)
    y0 = np.floor(gy).astype(np.int64)
    wx = gx - x0
    wy = gy - y0
    x0m = np.mod(x0, w)
    x1m = np.mod(x0 + 1, w)
    y1 = np.minimum(y0 + 1, h - 1)
    p = pixels.astype(np.float64)
    wxe = wx[..., None]
    wye = wy[..., None]
    top = p[y0, x0m] * (1.0 - wxe) + p[y0, x1m] * wxe
    bot = p[y1, x0m] * (1.0 - wxe) + p[y1, x1m] * wxe
    return top * (1.0 - wye) + bot * wye


def dewarp_crop(img: EquirectImage, cam: PerspectiveCamera) -> np.ndarray:
    """Resample an equirectangular panorama into a rectilinear view.

    For each output pixel center, the panorama is sampled with bilinear
    interpolation at the equirectangular position of that pixel's ray.
    Returns a (height_px, width_px, 3) uint8 array.
    """
    xw, yw, zw = _rays_for_frame(cam)
    lam = np.arctan2(xw, zw)
    phi = np.arcsin(np.clip(yw, -1.0, 1.0))
    px = (lam + np.pi) / (2.0 * np.pi) * img.width_px
    py = (np.pi / 2.0 - phi) / np.pi * img.height_px
    out = bilinear_sample(img.pixels, px, py)
    return np.rint(out).astype(np.uint8)


def generate_rotation_crops(img: EquirectImage, cam: PerspectiveCamera, n: int = 24) -> list[np.ndarray]:
    """Crops at yaw = k * (360/n) degrees for k = 0..n-1."""
    if n < 1:
        raise ValueError(f"need at least one crop, got n={n}")
    step = 2.0 * math.pi / n
    return [dewarp_crop(img, cam.with_yaw(k * step)) for k in range(n)]


def rotate_equirect(img: EquirectImage, angle_rad: float) -> EquirectImage:
    """Rotate panorama content about the vertical axis.

    A positive angle shifts content toward +x (rightward in the image) by
    angle / (2 pi) * W columns, rounded to whole columns; pixel-exact when
    the angle is a multiple of the column angular pitch.
    """
    shift = round(angle_rad / (2.0 * math.pi) * img.width_px)
    return EquirectImage(np.roll(img.pixels, shift, axis=1))


def save_ppm(path, pixels: np.ndarray) -> None:
    """Write a binary PPM (P6); byte-exact for fixed input."""
    pixels = np.asarray(pixels, dtype=np.uint8)
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise ValueError("PPM output requires an (H, W, 3) array")
    h, w = pixels.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())


def load_ppm(path) -> np.ndarray:
    """Read a binary PPM (P6) into an (H, W, 3) uint8 array."""
    with open(path, "rb") as fh:
        data = fh.read()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P6":
        raise ValueError(f"not a binary PPM file: magic {fields[0]!r}")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise ValueError(f"only maxval 255 supported, got {maxval}")
    pos += 1  # single whitespace byte after the header
    raw = data[pos : pos + w * h * 3]
    if len(raw) != w * h * 3:
        raise ValueError("truncated PPM pixel data")
    return np.frombuffer(raw, dtype=np.uint8).reshape(h, w, 3).copy()
