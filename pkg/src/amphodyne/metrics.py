"""Reconstruction-quality measures: fidelity, negativity depth, grid minima.

The overlap fidelity ``F = 2 pi * integral(W1 W2)`` is normalized so that
identical pure states give ``F = 1`` in the vacuum-variance-1/2 convention
(for a pure Gaussian, ``2 pi * integral(W^2) = 1``); applied to a squeezed
vacuum against its blurred reconstruction it reduces to the closed form

``F = 2 / sqrt((eps e^{2 r1} + 2)(eps e^{-2 r1} + 2))``.

The negativity depth of the (squeezed) single photon is its Wigner value at
the origin,

``W(0,0) = (eps^2 - 1) / (pi [(eps + e^{2 r1})(eps + e^{-2 r1})]^{3/2})``,

ideally ``-1/pi`` and vanishing at ``eps = 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .tomography import WignerGrid


@dataclass(frozen=True)
class QualityReport:
    """Summary quality figures of one reconstruction."""

    fidelity: float
    depth: float
    min_value: float
    min_location: tuple[float, float]
    epsilon_r_used: float

    def __post_init__(self):
        if self.fidelity > 1.0 + 1e-6:
            raise ValueError(f"fidelity {self.fidelity} exceeds 1 beyond tolerance")

    def to_dict(self) -> dict:
        return {
            "fidelity": self.fidelity,
            "depth": self.depth,
            "min_value": self.min_value,
            "min_location": list(self.min_location),
            "epsilon_r_used": self.epsilon_r_used,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def fidelity_bsv(r1: float, epsilon_r: float) -> float:
    """Closed-form overlap of a squeezed vacuum with its blurred reconstruction."""
    if r1 < 0 or epsilon_r < 0:
        raise ValueError("r1 and epsilon_r must be >= 0")
    return 2.0 / math.sqrt((epsilon_r * math.exp(2.0 * r1) + 2.0)
                           * (epsilon_r * math.exp(-2.0 * r1) + 2.0))


def fidelity_numeric(w_ideal: WignerGrid, w_recon: WignerGrid) -> float:
    """Overlap ``2 pi * sum(W1 W2) dq dp`` of two grids on identical axes.

    Meaningful when ``w_ideal`` is a pure state; the normalization then makes
    a perfect reconstruction score 1.
    """
    if (not np.array_equal(w_ideal.q_axis, w_recon.q_axis)
            or not np.array_equal(w_ideal.p_axis, w_recon.p_axis)):
        raise ValueError("fidelity_numeric requires identical grid axes")
    overlap = float(np.sum(w_ideal.values * w_recon.values))
    return 2.0 * math.pi * overlap * w_ideal.dq * w_ideal.dp


def wigner_depth(r1: float, epsilon_r: float) -> float:
    """Origin value of the blurred squeezed-single-photon Wigner function."""
    if r1 < 0 or epsilon_r < 0:
        raise ValueError("r1 and epsilon_r must be >= 0")
    s = math.exp(2.0 * r1)
    return (epsilon_r ** 2 - 1.0) / (
        math.pi * ((epsilon_r + s) * (epsilon_r + 1.0 / s)) ** 1.5)


def scan_minimum(grid: WignerGrid) -> tuple[float, float, float]:
    """Grid-exact minimum ``(value, q, p)``; ties break to the first
    occurrence in row-major order."""
    if grid.values.size == 0:
        raise ValueError("cannot scan an empty grid")
    flat = int(np.argmin(grid.values))
    i, j = np.unravel_index(flat, grid.values.shape)
    return (float(grid.values[i, j]), float(grid.q_axis[i]), float(grid.p_axis[j]))
