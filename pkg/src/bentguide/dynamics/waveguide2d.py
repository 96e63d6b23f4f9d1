"""Painted 2D waveguides along sampled planar curves."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal
from scipy.spatial import cKDTree

from ..geometry import SampledCurve
from ..potentials import PotentialGrid
from .splitstep import (AbsorbingLayer, Periodic, SplitStepper, Trajectory, WaveState, _check_budget,
                        run)


@dataclass(frozen=True)
class Harmonic:
    omega: float = 1.0

    def __call__(self, d):
        return 0.5 * self.omega**2 * d**2

    @property
    def width(self):
        return 1.0 / math.sqrt(self.omega)


@dataclass(frozen=True)
class GaussianWell:
    depth: float = 12.0
    width: float = 1.0

    def __call__(self, d):
        return -self.depth * np.exp(-0.5 * (d / self.width) ** 2)


Transverse = Union[Harmonic, GaussianWell]


def nearest_on_polyline(curve: SampledCurve, x, y):
    """Distance from each ``(x, y)`` to the polyline and the arc length of
    the closest point."""
    pts = np.asarray(curve.points, dtype=float)
    q = np.asarray(curve.arc_q1, dtype=float)
    xy = np.column_stack([np.ravel(x), np.ravel(y)])
    _, idx = cKDTree(pts).query(xy)
    best_d = np.full(len(xy), np.inf)
    best_q = np.zeros(len(xy))
    for lo in (idx - 1, idx):
        lo = np.clip(lo, 0, len(pts) - 2)
        a = pts[lo]
        seg = pts[lo + 1] - a
        t = np.clip(np.einsum("ij,ij->i", xy - a, seg) / np.einsum("ij,ij->i", seg, seg), 0.0, 1.0)
        d = np.linalg.norm(xy - a - t[:, None] * seg, axis=1)
        better = d < best_d
        best_d[better] = d[better]
        best_q[better] = (q[lo] + t * (q[lo + 1] - q[lo]))[better]
    shape = np.shape(x)
    return best_d.reshape(shape), best_q.reshape(shape)


class WaveguidePotential2D:
    """Potential ``U(x, y) = transverse(d) + modulation(q1*)``.

    ``d`` is the exact distance to the curve polyline and ``q1*`` the arc
    length of the nearest curve point.  ``depth_modulation`` may be a
    :class:`PotentialGrid` (interpolated in ``q1``) or a callable; it shifts
    the local depth of the guide, e.g. with a compensation barrier.
    """

    def __init__(self, curve: SampledCurve, x, y, transverse: Transverse = GaussianWell(),
                 depth_modulation: Optional[Union[PotentialGrid, Callable]] = None,
                 capture_radius: Optional[float] = None):
        if not curve.is_planar:
            raise ValueError("2D waveguides need a planar curve")
        self.curve = curve
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.transverse = transverse
        self.depth_modulation = depth_modulation
        self.capture_radius = 3.0 * transverse.width if capture_radius is None else capture_radius
        xx, yy = np.meshgrid(self.x, self.y, indexing="ij")
        self.distance, self.q1_nearest = nearest_on_polyline(curve, xx, yy)
        self.field = transverse(self.distance)
        if depth_modulation is not None:
            if isinstance(depth_modulation, PotentialGrid):
                mod = np.interp(self.q1_nearest, depth_modulation.q1, depth_modulation.v)
            else:
                mod = depth_modulation(self.q1_nearest)
            self.field = self.field + mod
        self.overlaps = self._branch_overlaps()
        if self.overlaps:
            warnings.warn(f"capture regions of distinct curve branches overlap near {self.overlaps[:3]}",
                          RuntimeWarning)

    @property
    def axes(self):
        return (self.x, self.y)

    def _branch_overlaps(self):
        pts = self.curve.points
        q = self.curve.arc_q1
        r = self.capture_radius
        pairs = cKDTree(pts).query_pairs(2 * r, output_type="ndarray")
        if len(pairs) == 0:
            return []
        far = np.abs(q[pairs[:, 0]] - q[pairs[:, 1]]) > math.pi * 2 * r
        hits = pairs[far]
        out = []
        for i, j in hits[:: max(1, len(hits) // 10)]:
            out.append((float(q[i]), float(q[j])))
        return out

    def transverse_ground_state(self, n=3201):
        """Ground state of the transverse profile, as a function of distance."""
        w = self.transverse.width
        s = np.linspace(-8 * w, 8 * w, n)
        h = s[1] - s[0]
        e, vec = eigh_tridiagonal(1.0 / h**2 + self.transverse(s), np.full(n - 1, -0.5 / h**2),
                                  select="i", select_range=(0, 0))
        chi = np.abs(vec[:, 0])
        return s, chi, float(e[0])

    def projector(self, bin_width):
        """Return ``(q1_bins, project)``; ``project(psi)`` bins ``|psi|**2``
        inside the capture radius by nearest-curve arc length."""
        q = self.curve.arc_q1
        edges = np.arange(q[0], q[-1] + bin_width, bin_width)
        centers = 0.5 * (edges[:-1] + edges[1:])
        inside = self.distance <= self.capture_radius
        idx = np.clip(np.searchsorted(edges, self.q1_nearest, side="right") - 1, 0, len(centers) - 1)
        idx = np.where(inside, idx, len(centers)).ravel()
        cell = float((self.x[1] - self.x[0]) * (self.y[1] - self.y[0]))
        nb = len(centers)

        def project(psi):
            w = (np.abs(psi) ** 2).ravel() * cell
            return np.bincount(idx, weights=w, minlength=nb + 1)[:nb] / bin_width

        return centers, project


def guided_wavepacket(u: WaveguidePotential2D, center_q1, fwhm, k0=0.0, boundary=Periodic()):
    """Transverse ground state times a longitudinal Gaussian in ``q1*``."""
    s, chi, _ = u.transverse_ground_state()
    # linear interpolation would leave kinks that fill the spectrum up to Nyquist
    trans = np.where(u.distance <= s[-1], CubicSpline(s, chi)(np.minimum(u.distance, s[-1])), 0.0)
    sigma = fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    dq = u.q1_nearest - center_q1
    psi = trans * np.exp(-dq**2 / (4 * sigma**2) + 1j * k0 * dq)
    st = WaveState(psi.astype(np.complex128), u.axes, boundary=boundary)
    return st.normalized()


def resolves_transverse_mode(u: WaveguidePotential2D, spacing, rel=1e-10):
    """True if the grid Nyquist momentum exceeds the momentum where the
    transverse ground state's spectral density falls below ``rel``."""
    s, chi, _ = u.transverse_ground_state()
    phi = np.abs(np.fft.fft(np.fft.ifftshift(chi))) ** 2
    k = np.abs(2 * np.pi * np.fft.fftfreq(len(s), d=s[1] - s[0]))
    k_need = float(k[phi > rel * phi.max()].max())
    return math.pi / max(spacing) > k_need


def propagate_2d(u: WaveguidePotential2D, psi0: WaveState, dt, n_steps, snapshot_every=None,
                 bin_width=1.0, keep_states=False, dtype=np.complex128, workers=None,
                 check_budget=True, flux_x=None) -> Trajectory:
    """2D split-step propagation with the arc-length projected density.

    The grid must spectrally resolve the transverse ground state (see
    :func:`resolves_transverse_mode`).  ``check_budget`` applies the same
    time-step budget as :func:`propagate_1d`; switching it off is meant for
    runs whose accuracy is established by a dt-halving comparison.
    """
    if psi0.psi.shape != u.field.shape:
        raise ValueError("state and waveguide grids differ")
    if not resolves_transverse_mode(u, psi0.spacing):
        raise ValueError("grid does not resolve the transverse ground state")
    if check_budget:
        _check_budget(u.field, psi0.psi, psi0.axes, dt)
    stepper = SplitStepper(u.axes, u.field, dt, psi0.boundary, dtype=dtype, workers=workers)
    q1_bins, project = u.projector(bin_width)
    return run(stepper, psi0, n_steps, snapshot_every, keep_states=keep_states, project=project,
               project_q1=q1_bins, flux_at=flux_x)


def wavepacket_transmission(nu, alpha, k0, fwhm, n=2001):
    """Analytic ``|T(k)|**2`` averaged over the momentum density of a
    Gaussian packet whose position density has full width ``fwhm``."""
    from ..scattering import analytic_pt_transmission

    sigma_k = 1.0 / (2.0 * fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0))))
    k = np.linspace(max(k0 - 8 * sigma_k, 1e-9), k0 + 8 * sigma_k, n)
    w = np.exp(-((k - k0) ** 2) / (2 * sigma_k**2))
    return float(np.sum(w * analytic_pt_transmission(nu, alpha, k)) / np.sum(w))


@dataclass
class BentGuideScenario:
    """Straight-armed bent guide with both asymptotes along ``+x``."""

    waveguide: WaveguidePotential2D
    psi0: WaveState
    launch_q1: float
    q1_cut: float

    @property
    def flux_x(self):
        """Grid ``x`` where the guide axis reaches the transmission cut."""
        c = self.waveguide.curve
        return float(np.interp(self.q1_cut, c.arc_q1, c.points[:, 0]))


def bent_guide_scenario(nu, alpha=0.125, fwhm=235.0, k0=1.0 / 32.0, shape=(2048, 128),
                        launch_q1=None, x_span=None, y_span=40.0, transverse: Transverse = Harmonic(),
                        absorber: Optional[AbsorbingLayer] = None, curve_step=0.1):
    """Masked reflectionless-profile guide and its incident guided packet.

    The curvature is the sign-masked profile of ``PT(nu, alpha)`` so the
    axis has no multiple points; both arms end parallel and the curve is
    rotated to run along ``+x``.  The packet starts ``4 sigma`` of its
    density plus the bend half-width (``5 / alpha``) before the bend.
    """
    from ..geometry import CurvatureProfile, integrate_frenet_serret

    sigma = fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    bend = 5.0 / alpha
    if launch_q1 is None:
        launch_q1 = -(bend + 4.0 * sigma)
    prof = CurvatureProfile.poschl_teller(nu, alpha).with_mask((0.0,))
    reach = abs(launch_q1) + 8.0 * sigma + bend
    curve = integrate_frenet_serret(prof, -reach, reach, curve_step)
    end_angle = float(curve.theta[-1])
    curve = curve.transformed(-end_angle)
    pts = curve.points
    y_mid = 0.5 * (np.interp(-bend, curve.arc_q1, pts[:, 1]) + np.interp(bend, curve.arc_q1, pts[:, 1]))
    if absorber is None:
        absorber = AbsorbingLayer.for_packet(k0, sigma)
    if x_span is None:
        # left layer, then the launched packet to 4 sigma; the outflow layer
        # starts at the transmission cut
        wl, wr = absorber.widths(0.0) if absorber.width is not None else (0.1 * reach, 0.1 * reach)
        x_lo = np.interp(launch_q1 - 4.0 * sigma, curve.arc_q1, pts[:, 0]) - wl
        x_hi = np.interp(bend, curve.arc_q1, pts[:, 0]) + wr
    else:
        x_lo, x_hi = x_span
    nx, ny = shape
    x = x_lo + (x_hi - x_lo) * np.arange(nx) / nx
    y = y_mid - 0.5 * y_span + y_span * np.arange(ny) / ny
    u = WaveguidePotential2D(curve, x, y, transverse)
    psi0 = guided_wavepacket(u, launch_q1, fwhm, k0, boundary=absorber)
    return BentGuideScenario(u, psi0, launch_q1, bend)
