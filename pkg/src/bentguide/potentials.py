"""Curvature-induced potentials and their supersymmetric partners.

Natural units (hbar = m = 1): the curvature-induced potential is
``V = -kappa**2 / 8`` and the factorisation ``A = i p / sqrt(2) + Phi`` gives
partner potentials ``V_pm = Phi**2 +- Phi' / sqrt(2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from . import _fd
from .geometry import (
    CurvatureProfile,
    curvature_squared,
    ellipse_arclength,
    ellipse_curvature_u,
    ellipse_parameter,
    ellipse_perimeter,
)
from .sukumar import sukumar_curvature_squared  # noqa: F401  (re-export)

SQRT2 = math.sqrt(2.0)
REALIZABLE_TOL = 1e-12
SOURCES = ("cip", "susy-minus", "susy-plus", "compensation", "external")


def _check_uniform(q1):
    q1 = np.asarray(q1, dtype=float)
    if q1.ndim != 1 or q1.size < 2:
        raise ValueError("grid must be 1D with at least 2 points")
    d = np.diff(q1)
    if np.any(d <= 0) or np.max(np.abs(d - d.mean())) > 1e-9 * max(1.0, abs(d.mean())):
        raise ValueError("grid must be uniform and increasing")
    return q1


def _tail_mean(v, side):
    m = max(1, int(round(0.05 * len(v))))
    return float(np.mean(v[:m] if side == "left" else v[-m:]))


@dataclass
class PotentialGrid:
    """Potential sampled on a uniform arc-length grid.

    ``v_left_asym``/``v_right_asym`` default to the mean of the outer 5% of
    samples on each side.  ``periodic`` marks closed guides whose grid covers
    ``[0, L)``.
    """

    q1: np.ndarray
    v: np.ndarray
    v_left_asym: Optional[float] = None
    v_right_asym: Optional[float] = None
    source: str = "external"
    periodic: bool = False

    def __post_init__(self):
        self.q1 = _check_uniform(self.q1)
        self.v = np.asarray(self.v, dtype=float)
        if self.v.shape != self.q1.shape:
            raise ValueError("q1 and v must have the same shape")
        if self.source not in SOURCES:
            raise ValueError(f"unknown source tag {self.source!r}")
        if self.v_left_asym is None:
            self.v_left_asym = _tail_mean(self.v, "left")
        if self.v_right_asym is None:
            self.v_right_asym = _tail_mean(self.v, "right")

    @property
    def dq(self) -> float:
        return float(self.q1[1] - self.q1[0])

    @property
    def length(self) -> float:
        """Perimeter for periodic grids, span otherwise."""
        n = len(self.q1)
        return self.dq * n if self.periodic else float(self.q1[-1] - self.q1[0])

    def aligned_with(self, other: "PotentialGrid") -> bool:
        return self.q1.shape == other.q1.shape and np.allclose(self.q1, other.q1, rtol=0, atol=1e-12)

    def __add__(self, other: "PotentialGrid") -> "PotentialGrid":
        if not self.aligned_with(other):
            raise ValueError("grids are not aligned")
        return PotentialGrid(self.q1, self.v + other.v, source="external", periodic=self.periodic)


def uniform_grid(q1_min, q1_max, spacing):
    n = int(math.ceil((q1_max - q1_min) / spacing - 1e-9))
    return np.linspace(q1_min, q1_max, n + 1)


def loop_grid(perimeter, n):
    """``n`` points covering the closed loop ``[0, perimeter)``."""
    return np.arange(n) * (perimeter / n)


def cip_from_profile(profile: CurvatureProfile, q1, periodic=None) -> PotentialGrid:
    """``V(q1) = -kappa(q1)**2 / 8``; insensitive to the sign mask."""
    q1 = _check_uniform(q1)
    v = -0.125 * np.asarray(curvature_squared(profile, q1))
    if periodic is None:
        periodic = profile.perimeter is not None and np.isclose(
            q1[-1] - q1[0] + (q1[1] - q1[0]), profile.perimeter, rtol=1e-9)
    return PotentialGrid(q1, v, source="cip", periodic=bool(periodic))


# superpotentials ------------------------------------------------------------------

@dataclass(frozen=True)
class Superpotential:
    """Superpotential ``Phi(q1)``.

    Kinds: ``tanh_wall`` (``A tanh(alpha q1)``), ``from_ground_state``
    (``Phi = -(ln psi0)' / sqrt(2)`` from a tabulated nodeless state) and
    ``tabulated``.
    """

    kind: str
    params: dict = field(default_factory=dict)

    @classmethod
    def tanh_wall(cls, amplitude, alpha):
        if not (amplitude > 0 and alpha > 0):
            raise ValueError("tanh wall needs A > 0 and alpha > 0")
        return cls("tanh_wall", {"A": float(amplitude), "alpha": float(alpha)})

    @classmethod
    def from_ground_state(cls, q1, psi0):
        q1 = _check_uniform(q1)
        psi0 = np.asarray(psi0, dtype=float)
        if psi0.shape != q1.shape:
            raise ValueError("psi0 must match the grid")
        if np.any(psi0[1:-1] <= 0):
            raise ValueError("ground state must be positive on the interior")
        if np.any(psi0 <= 0):
            raise ValueError("ground state must be positive at the sampled end points too")
        dlog = _fd.derivative(np.log(psi0), q1[1] - q1[0], 1)
        d2log = _fd.derivative(np.log(psi0), q1[1] - q1[0], 2)
        return cls("from_ground_state", {"q1": q1, "phi": -dlog / SQRT2, "dphi": -d2log / SQRT2})

    @classmethod
    def tabulated(cls, q1, phi):
        q1 = _check_uniform(q1)
        phi = np.asarray(phi, dtype=float)
        return cls("tabulated", {"q1": q1, "phi": phi, "dphi": _fd.derivative(phi, q1[1] - q1[0], 1)})

    def _on_grid(self, key, q):
        grid = self.params["q1"]
        vals = self.params[key]
        if q.shape == grid.shape and np.allclose(q, grid, rtol=0, atol=1e-12):
            return vals.copy()
        if q.min() < grid[0] - 1e-12 or q.max() > grid[-1] + 1e-12:
            raise ValueError("q1 outside the tabulated superpotential domain")
        return CubicSpline(grid, vals)(q)

    def value(self, q1):
        q = np.asarray(q1, dtype=float)
        if self.kind == "tanh_wall":
            return self.params["A"] * np.tanh(self.params["alpha"] * q)
        return self._on_grid("phi", q)

    def derivative(self, q1):
        q = np.asarray(q1, dtype=float)
        if self.kind == "tanh_wall":
            a, al = self.params["A"], self.params["alpha"]
            return a * al / np.cosh(al * q) ** 2
        return self._on_grid("dphi", q)

    def asymptotes(self):
        """``(Phi(-inf), Phi(+inf))`` (end samples for tabulated kinds)."""
        if self.kind == "tanh_wall":
            return -self.params["A"], self.params["A"]
        phi = self.params["phi"]
        return float(phi[0]), float(phi[-1])


def _realizable(k2):
    ok = bool(np.all(k2 >= -REALIZABLE_TOL))
    return np.where((k2 < 0) & (k2 >= -REALIZABLE_TOL), 0.0, k2), ok


@dataclass
class SusyPair:
    v_minus: PotentialGrid
    v_plus: PotentialGrid
    kappa_minus_sq: np.ndarray
    kappa_plus_sq: np.ndarray
    realizable_minus: bool
    realizable_plus: bool
    energy_offset: float = 0.0


def susy_pair_from_superpotential(phi: Superpotential, q1, energy_offset=0.0) -> SusyPair:
    """Partner potentials ``Phi**2 +- Phi'/sqrt(2) - energy_offset``.

    ``energy_offset`` is a common constant removed from both partners; it
    leaves ``V_+ - V_- = sqrt(2) Phi'`` untouched and is how the asymptotic
    ``Phi(+-inf)**2`` of a tanh wall is brought to zero so both partners can
    be curvature-induced.  Squared curvatures are ``-8 V_pm``; tiny negative
    values are clipped and anything below ``-1e-12`` flags the partner as not
    realisable by a curve.
    """
    q1 = _check_uniform(q1)
    p = phi.value(q1)
    dp = phi.derivative(q1)
    vm = p**2 - dp / SQRT2 - energy_offset
    vp = p**2 + dp / SQRT2 - energy_offset
    km, okm = _realizable(-8.0 * vm)
    kp, okp = _realizable(-8.0 * vp)
    return SusyPair(
        PotentialGrid(q1, vm, source="susy-minus"),
        PotentialGrid(q1, vp, source="susy-plus"),
        km, kp, okm, okp, float(energy_offset),
    )


def susy_partner_from_ground_state(psi0, kappa_minus_sq, dq):
    """``kappa_+**2 = kappa_-**2 + 8 (ln psi0)''`` on a uniform grid.

    ``psi0'' / psi0 - (psi0' / psi0)**2`` is evaluated as the second
    derivative of ``ln psi0``, avoiding the cancellation in the tails.  The
    end samples may vanish (box boundary); they are returned as NaN.
    """
    psi0 = np.asarray(psi0, dtype=float)
    km = np.asarray(kappa_minus_sq, dtype=float)
    if psi0.shape != km.shape:
        raise ValueError("psi0 and kappa_minus_sq must be aligned")
    if np.any(psi0[1:-1] <= 0):
        raise ValueError("psi0 must be positive on the interior (nodeless ground state)")
    out = np.full_like(km, np.nan)
    sl = slice(0 if psi0[0] > 0 else 1, len(psi0) if psi0[-1] > 0 else len(psi0) - 1)
    out[sl] = km[sl] + 8.0 * _fd.derivative(np.log(psi0[sl]), dq, 2)
    return out


# shape invariance ------------------------------------------------------------------

@dataclass
class ChainLevel:
    kappa_sq: np.ndarray
    realizable: bool


def shape_invariant_chain(kappa0_sq, residuals) -> List[ChainLevel]:
    """Levels ``kappa_s**2 = kappa_0**2 - 8 sum_{k<=s} R(a_k)``, ``s = 0..len(residuals)``."""
    k0 = np.asarray(kappa0_sq, dtype=float)
    res = np.asarray(residuals, dtype=float)
    if not np.all(np.isfinite(res)):
        raise ValueError("residuals must be finite")
    shifts = np.concatenate([[0.0], np.cumsum(res)])
    levels = []
    for shift in shifts:
        k2, ok = _realizable(k0 - 8.0 * shift)
        levels.append(ChainLevel(k2, ok))
    return levels


# elliptical guides -------------------------------------------------------------------

@dataclass
class EllipseCIP:
    u: np.ndarray
    q1: np.ndarray
    v: np.ndarray
    perimeter: float
    a: float
    b: float

    @property
    def v_min(self):
        return -self.a**2 / (8 * self.b**4)


def ellipse_cip(a, b, u) -> EllipseCIP:
    """Curvature-induced potential of the ellipse ``(a cos u, b sin u)``.

    ``V(u) = -(1/8) a**2 b**2 / (b**2 cos**2 u + a**2 sin**2 u)**3``; the
    result also carries the arc length ``q1(u)`` measured from ``u = 0``.
    """
    if not a >= b > 0:
        raise ValueError("ellipse needs a >= b > 0")
    u = np.asarray(u, dtype=float)
    v = -0.125 * a**2 * b**2 / (b**2 * np.cos(u) ** 2 + a**2 * np.sin(u) ** 2) ** 3
    return EllipseCIP(u, ellipse_arclength(a, b, u), v, ellipse_perimeter(a, b), float(a), float(b))


def ellipse_cip_loop(a, b, n) -> PotentialGrid:
    """Ellipse CIP on ``n`` uniform arc-length samples of ``[0, L)``."""
    perim = ellipse_perimeter(a, b)
    q1 = loop_grid(perim, n)
    u = ellipse_parameter(a, b, q1)
    v = -0.125 * ellipse_curvature_u(a, b, u) ** 2
    return PotentialGrid(q1, v, source="cip", periodic=True)


def ring_cip_loop(perimeter, n) -> PotentialGrid:
    r = perimeter / (2 * math.pi)
    q1 = loop_grid(perimeter, n)
    return PotentialGrid(q1, np.full(n, -0.125 / r**2), source="cip", periodic=True)


def compensation_barrier(v_target: PotentialGrid, v_reference: PotentialGrid) -> PotentialGrid:
    """Barrier ``U = -(V_target - V_reference)`` making the target guide
    isospectral to the reference one."""
    if not v_target.aligned_with(v_reference):
        raise ValueError("target and reference grids are not aligned")
    return PotentialGrid(v_target.q1, -(v_target.v - v_reference.v), source="compensation",
                         periodic=v_target.periodic)
