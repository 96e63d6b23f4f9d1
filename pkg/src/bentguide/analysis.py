"""Ground-state comparison for elliptical guides with and without the
compensating depth modulation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

import numpy as np

from .dynamics.splitstep import WaveState, Periodic, imaginary_time_ground_state
from .geometry import ellipse_axes
from .potentials import compensation_barrier, ellipse_cip_loop, ring_cip_loop


def uniformity(density) -> float:
    """Relative variation ``(max - min) / mean``."""
    d = np.asarray(density, dtype=float)
    return float((d.max() - d.min()) / d.mean())


def density_peaks(q1, density, rel=0.5) -> List[float]:
    """Arc lengths of the local maxima of a periodic density that exceed
    ``rel`` times the global maximum."""
    d = np.asarray(density, dtype=float)
    left, right = np.roll(d, 1), np.roll(d, -1)
    idx = np.nonzero((d > left) & (d >= right) & (d > rel * d.max()))[0]
    return [float(q1[i]) for i in idx]


@dataclass
class CompensationStudy:
    q1: np.ndarray
    v_cip: np.ndarray
    barrier: np.ndarray
    v_compensated: np.ndarray
    density_uncompensated: np.ndarray
    density_compensated: np.ndarray
    energy_uncompensated: float
    energy_compensated: float

    @property
    def uniformity_uncompensated(self):
        return uniformity(self.density_uncompensated)

    @property
    def uniformity_compensated(self):
        return uniformity(self.density_compensated)

    @property
    def peaks_uncompensated(self):
        return density_peaks(self.q1, self.density_uncompensated)


def compensation_study(eccentricity=0.9, perimeter=150.0, n=256, dtau=0.5, tol=1e-16,
                       max_steps=2_000_000) -> CompensationStudy:
    a, b = ellipse_axes(eccentricity, perimeter)
    v = ellipse_cip_loop(a, b, n)
    barrier = compensation_barrier(v, ring_cip_loop(perimeter, n))
    vc = v + barrier
    q = v.q1
    seed = WaveState((1.0 + 0.5 * np.cos(2 * math.pi * (q - perimeter / 4) / perimeter)).astype(complex),
                     (q,), boundary=Periodic())
    g0 = imaginary_time_ground_state(v, seed, dtau, tol, max_steps)
    g1 = imaginary_time_ground_state(vc, seed, dtau, tol, max_steps)
    return CompensationStudy(q, v.v, barrier.v, vc.v, g0.state.density, g1.state.density,
                             g0.energy, g1.energy)
