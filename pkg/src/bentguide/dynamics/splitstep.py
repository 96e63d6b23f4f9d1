"""Strang split-step Fourier propagation in real and imaginary time."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.fft as sfft

from ..errors import ConvergenceError, NumericalError
from ..potentials import PotentialGrid


@dataclass(frozen=True)
class Periodic:
    pass


@dataclass(frozen=True)
class AbsorbingLayer:
    """Complex absorbing potential ``-i W`` on both ends of the first axis.

    ``W = strength * (s / width)**power`` with ``s`` the depth into the
    layer.  ``width=None`` means 10% of the domain per side and
    ``right_width=None`` reuses the left width.
    """

    width: Optional[float] = None
    strength: float = 0.05
    power: int = 2
    right_width: Optional[float] = None

    @classmethod
    def for_momentum(cls, k_min, width, power=2, attenuation=30.0):
        """Layer whose round trip attenuates density at momentum ``k_min`` by ``exp(-attenuation)``."""
        return cls(width, attenuation * (power + 1) * k_min / (4.0 * width), power)

    @classmethod
    def for_packet(cls, k0, sigma, attenuation=100.0):
        """Outflow layer for a packet moving toward ``+x``.

        The right layer is two carrier wavelengths long so the slowest
        components (``k0 - 2/sigma``) are absorbed without reflecting back
        across the cut; the left layer only has to catch what wraps around
        the periodic seam.
        """
        lam = 2.0 * math.pi / k0
        k_min = max(k0 - 2.0 / sigma, 0.25 * k0)
        right = 2.0 * lam
        return cls(0.3 * lam, attenuation * 3 * k_min / (4.0 * right), 2, right)

    def widths(self, span):
        left = 0.1 * span if self.width is None else self.width
        return left, left if self.right_width is None else self.right_width

    def profile(self, x):
        x = np.asarray(x, dtype=float)
        span = x[-1] - x[0] + (x[1] - x[0])
        wl, wr = self.widths(span)
        left = np.clip((x[0] + wl - x) / wl, 0.0, None)
        right = np.clip((x - (x[-1] - wr)) / wr, 0.0, None)
        return self.strength * (left**self.power + right**self.power), wl


Boundary = Union[Periodic, AbsorbingLayer]


@dataclass
class WaveState:
    """Complex field on a uniform 1D or 2D grid.

    ``axes`` holds the coordinate array of each dimension.
    """

    psi: np.ndarray
    axes: tuple
    t: float = 0.0
    boundary: Boundary = field(default_factory=Periodic)

    def __post_init__(self):
        self.axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        if self.psi.shape != tuple(len(a) for a in self.axes):
            raise ValueError("psi shape does not match the axes")

    @property
    def spacing(self):
        return tuple(float(a[1] - a[0]) for a in self.axes)

    @property
    def cell(self):
        return float(np.prod(self.spacing))

    @property
    def density(self):
        return np.abs(self.psi) ** 2

    def norm(self):
        return float(np.sum(np.abs(self.psi) ** 2) * self.cell)

    def normalized(self):
        return replace(self, psi=self.psi / math.sqrt(self.norm()))

    def overlap(self, other: "WaveState"):
        return complex(np.vdot(self.psi, other.psi) * self.cell)


def wavenumbers(axes):
    """Angular FFT wavenumbers for each axis (broadcastable)."""
    ks = []
    nd = len(axes)
    for i, a in enumerate(axes):
        k = 2 * np.pi * np.fft.fftfreq(len(a), d=float(a[1] - a[0]))
        shape = [1] * nd
        shape[i] = len(a)
        ks.append(k.reshape(shape))
    return ks


def kinetic_energy_grid(axes):
    return sum(0.5 * k**2 for k in wavenumbers(axes))


def gaussian_packet(q1, center, fwhm, k0=0.0, period=None):
    """Normalised Gaussian whose density has full width ``fwhm``.

    On a periodic grid (``period`` given) the distance to ``center`` is
    wrapped into ``[-period/2, period/2)``.
    """
    q1 = np.asarray(q1, dtype=float)
    sigma = fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    d = q1 - center
    if period is not None:
        d = (d + 0.5 * period) % period - 0.5 * period
    psi = np.exp(-d**2 / (4 * sigma**2) + 1j * k0 * d)
    dq = q1[1] - q1[0]
    return psi / math.sqrt(np.sum(np.abs(psi) ** 2) * dq)


def energy_expectation(state: WaveState, potential):
    """``<psi|H|psi> / <psi|psi>`` with the kinetic term evaluated spectrally."""
    psi = state.psi
    phi = sfft.fftn(psi)
    kin = float(np.sum(kinetic_energy_grid(state.axes) * np.abs(phi) ** 2) / np.sum(np.abs(phi) ** 2))
    rho = np.abs(psi) ** 2
    return kin + float(np.sum(np.real(potential) * rho) / np.sum(rho))


def momentum_extent(psi, axes, rel=1e-12):
    """Largest ``|k|`` carrying spectral density above ``rel`` times the peak."""
    phi = np.abs(sfft.fftn(psi)) ** 2
    kk = np.sqrt(2.0 * kinetic_energy_grid(axes))
    kk = np.broadcast_to(kk, phi.shape)
    sig = phi > rel * phi.max()
    return float(kk[sig].max())


@dataclass
class Trajectory:
    """Snapshots of a propagation run.

    ``density`` is ``n(q1, t)`` (rows are snapshots); ``absorbed`` holds the
    cumulative norm removed by the left/right absorbing layers.  ``crossed``
    is the time-integrated probability current through the flux probe, when
    one was set.
    """

    times: np.ndarray
    q1: np.ndarray
    density: np.ndarray
    absorbed: np.ndarray
    norms: np.ndarray
    states: Optional[list] = None
    final: Optional[WaveState] = None
    crossed: Optional[np.ndarray] = None


class SplitStepper:
    """Strang step ``exp(-iV dt/2) exp(-iK dt) exp(-iV dt/2)``.

    With ``imaginary=True`` the factors become ``exp(-V dt/2)`` and
    ``exp(-K dt)``.  Absorbing layers act on the first axis.
    """

    def __init__(self, axes, potential, dt, boundary: Boundary = Periodic(), imaginary=False,
                 dtype=np.complex128, workers=None):
        self.axes = tuple(np.asarray(a, dtype=float) for a in axes)
        self.dt = float(dt)
        self.imaginary = imaginary
        self.dtype = np.dtype(dtype)
        self.workers = workers
        v = np.asarray(potential, dtype=float)
        shape = tuple(len(a) for a in self.axes)
        if v.shape != shape:
            raise ValueError(f"potential shape {v.shape} does not match grid {shape}")
        kin = kinetic_energy_grid(self.axes)
        self.absorber = None
        if imaginary:
            self.half = np.exp(-0.5 * dt * v).astype(self.dtype)
            self.kin = np.exp(-dt * kin).astype(self.dtype)
        else:
            self.half = np.exp(-0.5j * dt * v)
            if isinstance(boundary, AbsorbingLayer):
                w, _ = boundary.profile(self.axes[0])
                damp = np.exp(-0.5 * dt * w)
                self.half = self.half * damp.reshape((-1,) + (1,) * (len(shape) - 1))
                n0 = len(self.axes[0])
                inner = np.nonzero(w == 0.0)[0]
                lo, hi = (int(inner[0]), int(inner[-1]) + 1) if len(inner) else (n0 // 2, n0 // 2)
                loss = (1.0 - damp**2).reshape((-1,) + (1,) * (len(shape) - 1))
                # only the layer slices are summed each half step
                self.absorber = ((slice(0, lo), loss[:lo]), (slice(hi, n0), loss[hi:]))
            self.half = self.half.astype(self.dtype)
            self.kin = np.exp(-1j * dt * kin).astype(self.dtype)
        self.cell = float(np.prod([a[1] - a[0] for a in self.axes]))
        self.absorbed = np.zeros(2)
        self.renormalize = self.dtype != np.complex128
        self._norm = None

    def _absorb(self, psi):
        if self.absorber is not None:
            for side, (sl, loss) in enumerate(self.absorber):
                part = psi[sl]
                self.absorbed[side] += float(np.sum((part.real**2 + part.imag**2) * loss)) * self.cell
        psi *= self.half
        return psi

    def step(self, psi):
        before = self.absorbed.sum()
        if self.renormalize and not self.imaginary and self._norm is None:
            self._norm = self._norm_of(psi)
        psi = self._absorb(psi)
        phi = sfft.fftn(psi, workers=self.workers, overwrite_x=True)
        phi *= self.kin
        psi = sfft.ifftn(phi, workers=self.workers, overwrite_x=True)
        psi = self._absorb(psi)
        if self.renormalize and not self.imaginary:
            # single-precision FFTs drain ~1e-7 of the norm per step; restore
            # norm + absorbed, which the exact evolution conserves
            self._norm -= self.absorbed.sum() - before
            psi *= np.sqrt(self._norm / self._norm_of(psi)).astype(psi.real.dtype)
        return psi

    def _norm_of(self, psi):
        return float(np.sum(psi.real**2, dtype=float) + np.sum(psi.imag**2, dtype=float)) * self.cell


def _check_budget(v, psi, axes, dt):
    vmin = float(np.min(v))
    kmax = momentum_extent(psi, axes)
    if dt * abs(min(vmin, 0.0)) >= 0.5 or dt * kmax**2 / 2 >= 0.5:
        raise ValueError(
            f"time step too large: dt*|v_min|={dt * abs(vmin):.3g}, dt*k_max^2/2={dt * kmax**2 / 2:.3g} "
            "(both must be < 0.5)")


class FluxProbe:
    """Time integral of the probability current through the plane
    ``x0 = x`` (first axis), trapezoid rule over steps."""

    def __init__(self, axes, x, dt):
        a = axes[0]
        self.h = float(a[1] - a[0])
        self.index = int(np.argmin(np.abs(a - x)))
        if not 2 <= self.index < len(a) - 2:
            raise ValueError("flux probe must sit at least two points inside the grid")
        self.dt = dt
        # transverse cell
        self.weight = float(np.prod([b[1] - b[0] for b in axes[1:]]))
        self.total = 0.0
        self._last = None

    def current(self, psi):
        c = self.index
        d = (psi[c - 2] - 8.0 * psi[c - 1] + 8.0 * psi[c + 1] - psi[c + 2]) / (12.0 * self.h)
        return float(np.sum(np.imag(np.conj(psi[c]) * d))) * self.weight

    def add(self, psi):
        j = self.current(psi)
        if self._last is not None:
            self.total += 0.5 * self.dt * (self._last + j)
        self._last = j


def run(stepper: SplitStepper, state: WaveState, n_steps, snapshot_every=None,
        observe: Optional[Callable] = None, check_every=1000, keep_states=True, project=None,
        project_q1=None, flux_at=None):
    """Advance ``state`` by ``n_steps`` and collect snapshots.

    ``observe(step, psi)`` is called after every step.  ``project(psi)``
    maps a field to the density ``n(q1)`` stored per snapshot (defaults to
    ``|psi|**2`` of a 1D field).  ``flux_at`` places a :class:`FluxProbe`
    at that first-axis coordinate.
    """
    psi = state.psi.astype(stepper.dtype, copy=True)
    snapshot_every = snapshot_every or n_steps
    project = project or (lambda p: np.abs(p) ** 2)
    q1 = state.axes[0] if project_q1 is None else project_q1
    probe = None if flux_at is None else FluxProbe(state.axes, flux_at, stepper.dt)
    times, dens, absorbed, norms, states, crossed = [], [], [], [], [], []

    def snap(i, p):
        times.append(state.t + i * stepper.dt)
        dens.append(np.asarray(project(p), dtype=float))
        absorbed.append(stepper.absorbed.copy())
        norms.append(float(np.sum(np.abs(p) ** 2) * stepper.cell))
        if probe is not None:
            crossed.append(probe.total)
        if keep_states:
            states.append(p.astype(np.complex128, copy=True))

    if probe is not None:
        probe.add(psi)
    snap(0, psi)
    for i in range(1, n_steps + 1):
        psi = stepper.step(psi)
        if probe is not None:
            probe.add(psi)
        if observe is not None:
            observe(i, psi)
        if i % check_every == 0 and not np.all(np.isfinite(psi)):
            raise NumericalError("non-finite wavefunction", step=i)
        if i % snapshot_every == 0 or i == n_steps:
            if not np.all(np.isfinite(psi)):
                raise NumericalError("non-finite wavefunction", step=i)
            if not (times and abs(times[-1] - (state.t + i * stepper.dt)) < 1e-12):
                snap(i, psi)
    final = replace(state, psi=psi.astype(np.complex128), t=state.t + n_steps * stepper.dt)
    return Trajectory(np.array(times), np.asarray(q1), np.array(dens), np.array(absorbed),
                      np.array(norms), states if keep_states else None, final,
                      np.array(crossed) if probe is not None else None)


def propagate_1d(v: PotentialGrid, psi0: WaveState, dt, n_steps, snapshot_every=None,
                 observe=None, check_budget=True, workers=None, flux_at=None) -> Trajectory:
    """Propagate a 1D state in the potential ``v`` (same grid as ``psi0``).

    Periodic boundaries use the plain discrete Fourier basis; with an
    :class:`AbsorbingLayer` the layer is added as an imaginary potential.
    The step must satisfy ``dt |v_min| < 0.5`` and ``dt k_max**2 / 2 < 0.5``
    where ``k_max`` is the momentum extent of ``psi0``.
    """
    if psi0.psi.ndim != 1:
        raise ValueError("propagate_1d expects a 1D state")
    if len(v.q1) != len(psi0.axes[0]) or not np.allclose(v.q1, psi0.axes[0], atol=1e-9):
        raise ValueError("potential and state grids differ")
    if not dt > 0 or n_steps < 0:
        raise ValueError("need dt > 0 and n_steps >= 0")
    if check_budget:
        _check_budget(v.v, psi0.psi, psi0.axes, dt)
    stepper = SplitStepper(psi0.axes, v.v, dt, psi0.boundary, workers=workers)
    return run(stepper, psi0, n_steps, snapshot_every, observe=observe, flux_at=flux_at)


def transmitted_fraction(traj: Trajectory, q1_cut, snapshot=-1, include_absorbed=True):
    """Share of the density beyond ``q1_cut`` at a snapshot.

    Norm removed by the right (left) absorbing layer counts as transmitted
    (reflected) when ``include_absorbed`` is set.
    """
    q = traj.q1
    if not q[0] <= q1_cut <= q[-1]:
        raise ValueError("q1_cut outside the domain")
    n = traj.density[snapshot]
    right = float(np.sum(n[q > q1_cut]))
    total = float(np.sum(n))
    if include_absorbed:
        dq = q[1] - q[0]
        left_abs, right_abs = traj.absorbed[snapshot] / dq
        right += right_abs
        total += left_abs + right_abs
    return right / total


def transmitted_flux(traj: Trajectory, snapshot=-1):
    """Probability carried through the flux probe up to a snapshot, relative
    to the initial norm.

    Unlike :func:`transmitted_fraction` this is blind to mass that leaves a
    periodic domain on the left and re-enters through the right layer.
    """
    if traj.crossed is None:
        raise ValueError("trajectory was run without a flux probe")
    return float(traj.crossed[snapshot] / traj.norms[0])


@dataclass
class GroundState:
    state: WaveState
    energy: float
    n_steps: int


def imaginary_time_ground_state(potential, psi_seed: WaveState, dtau, tol=1e-12, max_steps=200_000,
                                check_every=20, workers=None) -> GroundState:
    """Relax ``psi_seed`` to the ground state by imaginary-time split steps.

    Stops once the energy changes by less than ``tol`` per step, averaged
    over ``check_every`` steps.  ``potential`` may be a :class:`PotentialGrid`
    or any array on the seed's grid.
    """
    if not dtau > 0:
        raise ValueError("dtau must be > 0")
    v = potential.v if isinstance(potential, PotentialGrid) else np.asarray(
        getattr(potential, "field", potential), dtype=float)
    stepper = SplitStepper(psi_seed.axes, v, dtau, imaginary=True, workers=workers)
    cell = psi_seed.cell
    psi = psi_seed.psi.astype(np.complex128)
    psi = psi / math.sqrt(np.sum(np.abs(psi) ** 2) * cell)
    e_old = energy_expectation(replace(psi_seed, psi=psi), v)
    for i in range(1, max_steps + 1):
        psi = stepper.step(psi)
        nrm = math.sqrt(np.sum(np.abs(psi) ** 2) * cell)
        if not np.isfinite(nrm) or nrm == 0:
            raise NumericalError("imaginary-time relaxation lost the state", step=i)
        psi /= nrm
        if i % check_every == 0:
            e = energy_expectation(replace(psi_seed, psi=psi), v)
            if abs(e - e_old) / check_every < tol:
                st = WaveState(psi, psi_seed.axes, psi_seed.t, psi_seed.boundary)
                return GroundState(st, e, i)
            e_old = e
    raise ConvergenceError(f"no convergence within {max_steps} imaginary-time steps")
