"""Poisson coincidence-count simulation with a uniform accidental background.

Stands in for the bench: every (l_a, l_b) cell draws one Poisson count
whose mean is the peak-normalised conditional probability scaled by the
pair rate, plus a flat accidental level.  Randomness is counter-based
and keyed per cell, so results do not depend on evaluation order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .relativity import require_gamma
from .spectrum import ConditionalSlice, OamWindow, conditional_slice, extract_conditional

SUBTRACT_MODES = ("accidental", "minimum", "both")

_U64 = (1 << 64) - 1
_I32_OFFSET = 1 << 31


@dataclass(frozen=True)
class NoiseModel:
    """Count-rate model: expected peak coincidences, flat accidentals, exposure.

    pair_rate is the expected number of true coincidences at the spectrum
    peak per unit integration; accidental_rate is the expected accidental
    count per cell per unit integration.
    """

    pair_rate: float = 1.0e4
    accidental_rate: float = 5.0
    integration: float = 1.0

    def __post_init__(self):
        for name in ("pair_rate", "accidental_rate", "integration"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.pair_rate <= 0.0:
            raise ValueError(f"pair_rate must be positive, got {self.pair_rate}")
        if self.accidental_rate < 0.0:
            raise ValueError(f"accidental_rate must be >= 0, got {self.accidental_rate}")
        if self.integration <= 0.0:
            raise ValueError(f"integration must be positive, got {self.integration}")


@dataclass(frozen=True)
class CountSpectrum:
    """Simulated coincidence counts over a pair of detection windows."""

    window_a: OamWindow
    window_b: OamWindow
    counts: np.ndarray
    seed: int
    model: NoiseModel
    gamma_encoded: float

    def __post_init__(self):
        counts = np.ascontiguousarray(self.counts, dtype=np.int64)
        if counts.shape != (len(self.window_a), len(self.window_b)):
            raise ValueError(
                f"counts shape {counts.shape} does not match windows "
                f"({len(self.window_a)}, {len(self.window_b)})"
            )
        if counts.min(initial=0) < 0:
            raise ValueError("counts must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "seed", int(self.seed))


def _cell_key(seed: int, l_a: int, l_b: int) -> int:
    # One 128-bit Philox key per (seed, l_a, l_b) cell.
    cell = ((int(l_a) + _I32_OFFSET) << 32) | (int(l_b) + _I32_OFFSET)
    return (cell << 64) | (int(seed) & _U64)


def simulate_counts(gamma: float, windows, model: NoiseModel, seed: int) -> CountSpectrum:
    """Draw one Poisson count per cell of the detection windows.

    Cell mean is pair_rate*integration*P(l_b | l_a) + accidental_rate*integration
    with the conditional spectrum peak-normalised to 1.  Identical
    (gamma, windows, model, seed) reproduce identical counts.
    """
    gamma = require_gamma(gamma)
    window_a, window_b = windows
    scale = model.pair_rate * model.integration
    offset = model.accidental_rate * model.integration
    counts = np.empty((len(window_a), len(window_b)), dtype=np.int64)
    lbs = window_b.indices()
    for i, l_a in enumerate(window_a.indices()):
        mu = scale * conditional_slice(int(l_a), window_b, gamma).values + offset
        for j, l_b in enumerate(lbs):
            rng = np.random.Generator(np.random.Philox(key=_cell_key(seed, int(l_a), int(l_b))))
            counts[i, j] = rng.poisson(mu[j])
    return CountSpectrum(
        window_a=window_a, window_b=window_b, counts=counts, seed=int(seed), model=model, gamma_encoded=gamma
    )


def subtract_background(counts: CountSpectrum, mode: str) -> np.ndarray:
    """Clean a count matrix, clamping at zero after each subtraction step.

    accidental removes the expected flat background from every cell;
    minimum removes the smallest value of each conditional slice (each
    fixed-l_a row); both applies accidental then minimum.
    """
    if mode not in SUBTRACT_MODES:
        raise ValueError(f"unknown subtraction mode {mode!r}; expected one of {SUBTRACT_MODES}")
    values = counts.counts.astype(float)
    if mode in ("accidental", "both"):
        values = np.maximum(values - counts.model.accidental_rate * counts.model.integration, 0.0)
    if mode in ("minimum", "both"):
        values = np.maximum(values - values.min(axis=1, keepdims=True), 0.0)
    return values


def counts_conditional(counts: CountSpectrum, l_a: int, mode: str | None = None) -> ConditionalSlice:
    """Conditional slice of a count spectrum, optionally background-subtracted."""
    values = counts.counts.astype(float) if mode is None else subtract_background(counts, mode)
    return extract_conditional(values, counts.window_a, counts.window_b, l_a)


def count_spectrum_to_csv(counts: CountSpectrum) -> str:
    """CSV serialisation with header l_a,l_b,count."""
    lines = ["l_a,l_b,count"]
    las = counts.window_a.indices()
    lbs = counts.window_b.indices()
    for i, la in enumerate(las):
        for j, lb in enumerate(lbs):
            lines.append(f"{la},{lb},{counts.counts[i, j]}")
    return "\n".join(lines) + "\n"


def count_spectrum_sidecar(counts: CountSpectrum) -> dict:
    """JSON sidecar describing how the counts were produced."""
    return {
        "gamma_encoded": counts.gamma_encoded,
        "seed": counts.seed,
        "model": {
            "pair_rate": counts.model.pair_rate,
            "accidental_rate": counts.model.accidental_rate,
            "integration": counts.model.integration,
        },
        "windows": {
            "a": [counts.window_a.l_min, counts.window_a.l_max],
            "b": [counts.window_b.l_min, counts.window_b.l_max],
        },
    }


def sidecar_path(csv_path) -> Path:
    path = Path(csv_path)
    return path.with_name(path.stem + ".meta.json")


def read_count_spectrum(csv_path) -> CountSpectrum:
    """Rebuild a CountSpectrum from a counts CSV and its JSON sidecar."""
    csv_path = Path(csv_path)
    meta = json.loads(sidecar_path(csv_path).read_text(encoding="utf-8"))
    window_a = OamWindow(*meta["windows"]["a"])
    window_b = OamWindow(*meta["windows"]["b"])
    model = NoiseModel(**meta["model"])
    counts = np.zeros((len(window_a), len(window_b)), dtype=np.int64)
    lines = csv_path.read_text(encoding="utf-8").strip().splitlines()
    if lines[0] != "l_a,l_b,count":
        raise ValueError(f"{csv_path}: expected header 'l_a,l_b,count', got {lines[0]!r}")
    for line in lines[1:]:
        la, lb, count = line.split(",")
        counts[window_a.index_of(int(la)), window_b.index_of(int(lb))] = int(count)
    return CountSpectrum(
        window_a=window_a,
        window_b=window_b,
        counts=counts,
        seed=int(meta["seed"]),
        model=model,
        gamma_encoded=float(meta["gamma_encoded"]),
    )
