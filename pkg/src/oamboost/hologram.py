"""Length-contracted vortex phase masks sampled on a Cartesian grid.

A detector moving along x projects onto OAM modes whose azimuth is the
boosted coordinate, so the mask phase is l * atan2(gamma*y, x).  Pure
phase fields only; no grating carrier is added.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .relativity import TWO_PI, require_gamma

DEFAULT_SIZE = 512
DEFAULT_EXTENT = 1.0

EXPORT_FORMATS = ("pgm8", "csv")


@dataclass(frozen=True)
class HologramField:
    """Sampled projection phase wrapped to [0, 2*pi)."""

    width: int
    height: int
    extent: float
    l: int
    gamma: float
    phase: np.ndarray

    def __post_init__(self):
        phase = np.ascontiguousarray(self.phase, dtype=float)
        if phase.shape != (self.height, self.width):
            raise ValueError(f"phase shape {phase.shape} does not match {self.height}x{self.width}")
        phase.setflags(write=False)
        object.__setattr__(self, "phase", phase)


def grid_coordinates(n: int, extent: float) -> np.ndarray:
    """Pixel-centre coordinates, symmetric about 0 with edge pixels at +-extent."""
    return (np.arange(n) - (n - 1) / 2.0) * (2.0 * extent / (n - 1))


def generate_hologram(
    l: int,
    gamma: float,
    width: int = DEFAULT_SIZE,
    height: int = DEFAULT_SIZE,
    extent: float = DEFAULT_EXTENT,
) -> HologramField:
    """Sample the contracted vortex phase l * atan2(gamma*y, x) over the grid.

    Even sizes place the vortex core between pixels; for odd sizes the
    centre pixel uses the atan2(0, 0) = 0 convention.
    """
    gamma = require_gamma(gamma)
    width = int(width)
    height = int(height)
    if width < 2 or height < 2:
        raise ValueError(f"width and height must be >= 2, got {width}x{height}")
    extent = float(extent)
    if not extent > 0.0:
        raise ValueError(f"extent must be positive, got {extent}")
    x = grid_coordinates(width, extent)
    y = grid_coordinates(height, extent)
    phase = np.mod(int(l) * np.arctan2(gamma * y[:, None], x[None, :]), TWO_PI)
    phase[phase >= TWO_PI] = 0.0
    return HologramField(width=width, height=height, extent=extent, l=int(l), gamma=gamma, phase=phase)


def export_hologram(field: HologramField, format: str) -> bytes:
    """Serialise a phase field; byte-identical for identical inputs.

    pgm8: binary P5 with maxval 255, pixel = round(phase / 2*pi * 255) with
    halves rounded away from zero, rows top to bottom.  csv: one text row
    per pixel row, 17 significant digits.
    """
    if format == "pgm8":
        # phase < 2*pi, so the scaled value never reaches 256
        pixels = np.floor(field.phase / TWO_PI * 255.0 + 0.5).astype(np.uint8)
        header = f"P5\n{field.width} {field.height}\n255\n".encode("ascii")
        return header + pixels.tobytes()
    if format == "csv":
        lines = [",".join(f"{v:.17g}" for v in row) for row in field.phase]
        return ("\n".join(lines) + "\n").encode("ascii")
    raise ValueError(f"unsupported hologram format {format!r}; expected one of {EXPORT_FORMATS}")


def parse_hologram_csv(data) -> np.ndarray:
    """Inverse of the csv export: recover the phase matrix."""
    if isinstance(data, bytes):
        data = data.decode("ascii")
    rows = [[float(tok) for tok in line.split(",")] for line in data.strip().splitlines()]
    return np.array(rows, dtype=float)


def hologram_filename(field: HologramField, ext: str) -> str:
    """File naming convention holo_l{l}_g{gamma}_{width}x{height}.{ext}."""
    return f"holo_l{field.l}_g{field.gamma:g}_{field.width}x{field.height}.{ext}"


def phase_on_circle(l: int, gamma: float, radius: float, angles) -> np.ndarray:
    """Wrapped mask phase along an origin-centred circle at the given angles."""
    gamma = require_gamma(gamma)
    angles = np.asarray(angles, dtype=float)
    x = radius * np.cos(angles)
    y = radius * np.sin(angles)
    return np.mod(int(l) * np.arctan2(gamma * y, x), TWO_PI)


def winding_number(l: int, gamma: float, samples: int = 3600) -> float:
    """Accumulated phase around the core divided by 2*pi; equals l for any gamma."""
    angles = np.linspace(0.0, TWO_PI, int(samples) + 1)
    unwrapped = np.unwrap(phase_on_circle(l, gamma, 1.0, angles))
    return float((unwrapped[-1] - unwrapped[0]) / TWO_PI)
