"""Quantum carpets and Talbot revivals on closed guides."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..potentials import PotentialGrid
from .splitstep import Periodic, WaveState, gaussian_packet, propagate_1d


def revival_time(perimeter):
    """Talbot revival period ``L**2 / pi`` of a ring of circumference ``L``."""
    return perimeter**2 / math.pi


@dataclass
class CarpetResult:
    """Density history ``n(q1, t)`` and revival fidelity.

    ``revival_fidelity`` is ``|<psi(0)|psi(t)>|**2`` on ``t_grid``;
    ``fine_t``/``fine_fidelity`` carry the same quantity at every time step.
    """

    density: np.ndarray
    q1_grid: np.ndarray
    t_grid: np.ndarray
    revival_fidelity: np.ndarray
    fine_t: np.ndarray
    fine_fidelity: np.ndarray

    def fidelity_at(self, t):
        i = int(np.argmin(np.abs(self.fine_t - t)))
        return float(self.fine_fidelity[i])

    def max_fidelity(self, t_lo, t_hi):
        sel = (self.fine_t >= t_lo) & (self.fine_t <= t_hi)
        return float(np.max(self.fine_fidelity[sel]))


def localized_state(v: PotentialGrid, center=0.0, fwhm=None):
    """Gaussian at rest on the loop; ``fwhm`` defaults to ``L/30``."""
    perim = v.length
    fwhm = perim / 30.0 if fwhm is None else fwhm
    return WaveState(gaussian_packet(v.q1, center, fwhm, period=perim), (v.q1,), boundary=Periodic())


def talbot_carpet(v: PotentialGrid, psi0: WaveState, t_max, n_frames, dt=0.05, workers=None) -> CarpetResult:
    """Propagate on the closed loop ``v`` and record the carpet.

    Frames are equally spaced on ``[0, t_max]``; the time step is shrunk so
    every frame falls on a step.
    """
    if not v.periodic:
        raise ValueError("talbot_carpet needs a periodic (closed-loop) potential")
    if n_frames < 2:
        raise ValueError("need at least two frames")
    frame_dt = t_max / (n_frames - 1)
    sub = max(1, int(math.ceil(frame_dt / dt - 1e-9)))
    step = frame_dt / sub
    ref = psi0.psi.copy()
    cell = psi0.cell
    fine = np.empty(sub * (n_frames - 1) + 1)
    fine[0] = abs(np.vdot(ref, psi0.psi) * cell) ** 2

    def observe(i, psi):
        fine[i] = abs(np.vdot(ref, psi) * cell) ** 2

    traj = propagate_1d(v, psi0, step, sub * (n_frames - 1), snapshot_every=sub, observe=observe,
                        workers=workers)
    fid = fine[::sub]
    return CarpetResult(traj.density, v.q1.copy(), traj.times, fid,
                        psi0.t + step * np.arange(len(fine)), fine)
