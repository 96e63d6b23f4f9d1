"""Stationary 1D scattering and bound states on a potential grid."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .potentials import PotentialGrid

SQRT2 = math.sqrt(2.0)


@dataclass
class ScatteringResult:
    """Reflection/transmission amplitudes for waves incident from the left.

    ``k_left``/``k_right`` are the channel momenta; the transmission
    amplitude is flux normalised, i.e. ``|R|**2 + (k_right/k_left) |T|**2 = 1``.
    """

    k: np.ndarray
    R: np.ndarray
    T: np.ndarray
    unitarity_residual: float
    k_left: np.ndarray
    k_right: np.ndarray

    @property
    def transmission(self):
        return np.abs(self.T) ** 2

    @property
    def reflection(self):
        return np.abs(self.R) ** 2

    @property
    def flux_transmission(self):
        return self.k_right / self.k_left * np.abs(self.T) ** 2


def default_k_grid(n=64, k_min=0.02, k_max=2.0):
    return np.geomspace(k_min, k_max, n)


def _numerov_lattice_angle(f, h):
    """Phase per step of the Numerov plane wave in a flat region (f = -k**2)."""
    w = 1.0 - h * h * f / 12.0
    c = (12.0 - 10.0 * w) / (2.0 * w)
    if np.any(np.abs(c) >= 1.0):
        raise ValueError("k * dq too large for the grid to carry a propagating wave")
    return np.arccos(c), w


def scatter(v: PotentialGrid, k, tail_tol=1e-8) -> ScatteringResult:
    """Amplitudes ``R(k)``, ``T(k)`` by Numerov integration from the right.

    The asymptotes are snapped to the end samples ``v[0]`` and ``v[-1]``.  A
    pure outgoing wave is imposed on the last two nodes and the solution is
    matched to incoming plus reflected waves on the first two; the plane
    waves are the exact flat-region solutions of the Numerov recurrence, so
    the discrete flux is conserved to rounding.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if np.any(k <= 0):
        raise ValueError("k must be > 0")
    q, pot = v.q1, v.v.copy()
    n = len(q)
    if n < 8:
        raise ValueError("grid too small")
    h = v.dq
    m = max(2, int(round(0.05 * n)))
    vl, vr = pot[0], pot[-1]
    if np.max(np.abs(pot[:m] - vl)) > tail_tol or np.max(np.abs(pot[-m:] - vr)) > tail_tol:
        raise ValueError("potential tails are not flat (increase the box)")
    pot[:2] = vl
    pot[-2:] = vr

    energy = 0.5 * k**2 + vl
    kr2 = 2.0 * (energy - vr)
    if np.any(kr2 <= 0):
        raise ValueError("energy below the right channel threshold")
    kr = np.sqrt(kr2)

    f_left = -k**2
    f_right = -kr2
    th_l, w_l = _numerov_lattice_angle(f_left, h)
    th_r, w_r = _numerov_lattice_angle(f_right, h)
    kd_l = th_l / h
    kd_r = th_r / h

    # psi_{i-1} = ((12 - 10 w_i) psi_i - w_{i+1} psi_{i+1}) / w_{i-1}
    w = 1.0 - h * h * (2.0 * (pot[:, None] - energy[None, :])) / 12.0
    psi_next = np.exp(1j * kd_r * q[-1])
    psi = np.exp(1j * kd_r * q[-2])
    log_scale = np.zeros_like(k)
    for i in range(n - 2, 0, -1):
        psi_prev = ((12.0 - 10.0 * w[i]) * psi - w[i + 1] * psi_next) / w[i - 1]
        psi_next, psi = psi, psi_prev
        big = np.abs(psi) > 1e100
        if big.any():
            s = np.where(big, 1e-100, 1.0)
            psi = psi * s
            psi_next = psi_next * s
            log_scale -= np.log(s)
    psi0, psi1 = psi, psi_next
    e_p = np.exp(1j * th_l)
    amp_in = (psi1 - psi0 / e_p) / (e_p - 1.0 / e_p)
    amp_out = psi0 - amp_in
    a = amp_in * np.exp(-1j * kd_l * q[0])
    b = amp_out * np.exp(1j * kd_l * q[0])
    scale = np.exp(-log_scale)
    R = b / a
    T = scale / a
    # discrete flux w**2 sin(theta) -> continuum normalisation k_right/k_left
    disc = (w_r**2 * np.sin(th_r)) / (w_l**2 * np.sin(th_l))
    T = T * np.sqrt(disc / (kr / k))
    resid = np.abs(np.abs(R) ** 2 + (kr / k) * np.abs(T) ** 2 - 1.0)
    return ScatteringResult(k, R, T, float(np.max(resid)), k, kr)


def analytic_pt_transmission(nu, alpha, k):
    """``|T|**2 = mu**2 / (1 + mu**2)``, ``mu = sinh(pi k / alpha) / sin(pi nu)``,
    for the well ``-nu (nu + 1) alpha**2 sech**2(alpha q) / 2``; exactly 1 at
    integer ``nu``."""
    k = np.asarray(k, dtype=float)
    if float(nu) == round(float(nu)):
        return np.ones_like(k) if k.ndim else 1.0
    s = math.sin(math.pi * nu) ** 2
    with np.errstate(over="ignore", invalid="ignore"):
        sh = np.sinh(np.pi * k / alpha) ** 2
        out = np.where(np.isinf(sh), 1.0, sh / (sh + s))
    return float(out) if out.ndim == 0 else out


# bound states -------------------------------------------------------------------

@dataclass
class BoundStateSpectrum:
    energies: np.ndarray
    wavefunctions: np.ndarray
    q1: np.ndarray

    @property
    def count(self) -> int:
        return len(self.energies)


def _tridiag_levels(v, h, upper):
    d = 1.0 / h**2 + v
    e = np.full(len(v) - 1, -0.5 / h**2)
    lo = float(np.min(v)) - 1.0
    if upper <= lo:
        return np.empty(0), np.empty((len(v), 0))
    return eigh_tridiagonal(d, e, select="v", select_range=(lo, upper))


def count_nodes(psi, rel=1e-6):
    sig = psi[np.abs(psi) > rel * np.max(np.abs(psi))]
    return int(np.sum(np.signbit(sig[1:]) != np.signbit(sig[:-1])))


def bound_states(v: PotentialGrid, edge_margin=1e-6, richardson=True) -> BoundStateSpectrum:
    """Bound states of ``-d^2/2 + V`` with Dirichlet walls at the box ends.

    Eigenvalues below ``min(asymptotes) - edge_margin`` are kept, which drops
    threshold (zero-energy) states.  With ``richardson`` the energies are
    extrapolated from spacings ``h`` and ``2h`` as ``(4 E_h - E_2h) / 3``.
    """
    h = v.dq
    vmin = float(np.min(v.v))
    if h * h * abs(vmin) >= 0.1:
        raise ValueError("grid too coarse: need dq**2 |v_min| < 0.1")
    upper = min(v.v_left_asym, v.v_right_asym) - edge_margin
    energies, vecs = _tridiag_levels(v.v, h, upper)
    if richardson and len(energies):
        coarse, _ = _tridiag_levels(v.v[::2], 2 * h, upper + 0.05 * abs(upper) + 1e-3)
        m = min(len(coarse), len(energies))
        energies = energies.copy()
        energies[:m] = (4.0 * energies[:m] - coarse[:m]) / 3.0
        keep = energies < upper
        energies, vecs = energies[keep], vecs[:, keep]
    vecs = vecs / np.sqrt(np.sum(vecs**2, axis=0) * h)
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        first = np.nonzero(np.abs(col) > 1e-3 * np.max(np.abs(col)))[0][0]
        if col[first] < 0:
            vecs[:, j] = -col
    if vecs.shape[1] and max(abs(vecs[0, 0]), abs(vecs[-1, 0])) > 1e-8:
        warnings.warn("ground state does not vanish at the box edge; enlarge the box", RuntimeWarning)
    return BoundStateSpectrum(energies, vecs, v.q1.copy())


# SUSY partner amplitudes -------------------------------------------------------------

def susy_amplitude_map(result_plus: ScatteringResult, phi_minus_asym, phi_plus_asym) -> ScatteringResult:
    """Partner amplitudes from ``R_+``, ``T_+``.

    ``R_- = (Phi_- + i k/sqrt2) / (Phi_- - i k/sqrt2) R_+`` and
    ``T_- = (Phi_+ - i k'/sqrt2) / (Phi_- - i k/sqrt2) T_+`` with
    ``k = sqrt(2 (E - Phi_-**2))``, ``k' = sqrt(2 (E - Phi_+**2))``.
    """
    k = np.asarray(result_plus.k, dtype=float)
    pm, pp = float(phi_minus_asym), float(phi_plus_asym)
    kp2 = k**2 + 2.0 * (pm**2 - pp**2)
    if np.any(kp2 <= 0):
        raise ValueError("energy below the right channel threshold")
    kp = np.sqrt(kp2)
    den = pm - 1j * k / SQRT2
    R = (pm + 1j * k / SQRT2) / den * result_plus.R
    T = (pp - 1j * kp / SQRT2) / den * result_plus.T
    resid = np.abs(np.abs(R) ** 2 + (kp / k) * np.abs(T) ** 2 - 1.0)
    return ScatteringResult(k, R, T, float(np.max(resid)), k, kp)
