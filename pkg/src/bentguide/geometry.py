"""Curves from curvature profiles.

Curves are parametrised by arc length ``q1`` in units of the transverse
width ``sigma0``.  Planar curves are built from the tangent angle
``theta(q1) = int_0^q1 kappa``; the optional torsion lift places the planar
curve on the generalised helix ``(x(s), y(s), tau s)`` whose arc length is
``sqrt(1 + tau**2) s``.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import ellipe, ellipeinc

from . import _fd
from .sukumar import sukumar_curvature_squared, validate_eta

KINDS = ("straight", "circle", "poschl_teller", "sukumar", "ellipse", "tabulated")


@dataclass(frozen=True)
class CurvatureProfile:
    """Design input: a curvature law ``kappa(q1)`` plus sign mask and torsion.

    ``sign_changes`` lists the abscissas where the mask ``sgn(g(q1))`` flips;
    the mask is ``+1`` to the right of every abscissa, so ``(0.0,)`` encodes
    ``sgn(q1)``.  Use the classmethod constructors rather than building
    ``params`` by hand.
    """

    kind: str
    params: dict = field(default_factory=dict)
    sign_changes: tuple = ()
    torsion: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        object.__setattr__(self, "sign_changes", tuple(sorted(float(s) for s in self.sign_changes)))
        if not self.torsion >= 0:
            raise ValueError("torsion must be >= 0")
        p = self.params
        if self.kind == "circle" and not p["radius"] > 0:
            raise ValueError("circle radius must be > 0")
        if self.kind == "poschl_teller" and not (p["nu"] > 0 and p["alpha"] > 0):
            raise ValueError("Poschl-Teller needs nu > 0 and alpha > 0")
        if self.kind == "sukumar":
            validate_eta(p["eta"])
        if self.kind == "ellipse" and not p["a"] >= p["b"] > 0:
            raise ValueError("ellipse needs a >= b > 0")
        if self.kind == "tabulated":
            q = np.asarray(p["q1"], dtype=float)
            k = np.asarray(p["kappa"], dtype=float)
            if q.ndim != 1 or q.shape != k.shape or q.size < 4:
                raise ValueError("tabulated profile needs matching 1D q1/kappa arrays (>= 4 samples)")
            if np.any(np.diff(q) <= 0):
                raise ValueError("tabulated q1 samples must be strictly increasing")

    # constructors -----------------------------------------------------------
    @classmethod
    def straight(cls):
        return cls("straight")

    @classmethod
    def circle(cls, radius):
        return cls("circle", {"radius": float(radius)})

    @classmethod
    def poschl_teller(cls, nu, alpha):
        return cls("poschl_teller", {"nu": float(nu), "alpha": float(alpha)})

    @classmethod
    def sukumar(cls, eta):
        return cls("sukumar", {"eta": tuple(float(e) for e in eta)})

    @classmethod
    def ellipse(cls, a, b):
        return cls("ellipse", {"a": float(a), "b": float(b)})

    @classmethod
    def ellipse_from(cls, eccentricity, perimeter):
        return cls.ellipse(*ellipse_axes(eccentricity, perimeter))

    @classmethod
    def tabulated(cls, q1, kappa):
        return cls("tabulated", {"q1": np.asarray(q1, dtype=float), "kappa": np.asarray(kappa, dtype=float)})

    def with_mask(self, sign_changes: Sequence[float]):
        return dataclasses.replace(self, sign_changes=tuple(sign_changes))

    def with_torsion(self, torsion: float):
        return dataclasses.replace(self, torsion=float(torsion))

    # serialisation ------------------------------------------------------------
    def to_dict(self):
        d = {"kind": self.kind}
        for k, v in self.params.items():
            d[k] = np.asarray(v).tolist() if isinstance(v, (np.ndarray, tuple)) else v
        if self.sign_changes:
            d["sign_changes"] = list(self.sign_changes)
        if self.torsion:
            d["torsion"] = self.torsion
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        kind = d.pop("kind")
        sign_changes = d.pop("sign_changes", ())
        torsion = d.pop("torsion", 0.0)
        builders = {
            "straight": lambda: cls.straight(),
            "circle": lambda: cls.circle(d.pop("radius")),
            "poschl_teller": lambda: cls.poschl_teller(d.pop("nu"), d.pop("alpha")),
            "sukumar": lambda: cls.sukumar(d.pop("eta")),
            "ellipse": lambda: (cls.ellipse_from(d.pop("eccentricity"), d.pop("perimeter"))
                                if "eccentricity" in d else cls.ellipse(d.pop("a"), d.pop("b"))),
            "tabulated": lambda: cls.tabulated(d.pop("q1"), d.pop("kappa")),
        }
        if kind not in builders:
            raise ValueError(f"unknown profile kind {kind!r}")
        prof = builders[kind]()
        if d:
            raise ValueError(f"unexpected keys for {kind} profile: {sorted(d)}")
        return dataclasses.replace(prof, sign_changes=tuple(sign_changes), torsion=float(torsion))

    @property
    def perimeter(self) -> Optional[float]:
        """Length of the closed curve, or None for open guides."""
        if self.kind == "circle":
            return 2 * math.pi * self.params["radius"]
        if self.kind == "ellipse":
            return ellipse_perimeter(self.params["a"], self.params["b"])
        return None

    @property
    def domain(self):
        if self.kind == "tabulated":
            q = self.params["q1"]
            return float(q[0]), float(q[-1])
        return -math.inf, math.inf


# ellipse helpers ---------------------------------------------------------------

def ellipse_perimeter(a, b):
    e2 = 1.0 - (b / a) ** 2
    return 4.0 * a * float(ellipe(e2))


def ellipse_axes(eccentricity, perimeter):
    """Semi-axes ``(a, b)`` of the ellipse with given eccentricity and perimeter."""
    if not 0 <= eccentricity < 1:
        raise ValueError("eccentricity must lie in [0, 1)")
    if not perimeter > 0:
        raise ValueError("perimeter must be > 0")
    # perimeter is linear in a at fixed eccentricity
    a = perimeter / (4.0 * float(ellipe(eccentricity**2)))
    return a, a * math.sqrt(1.0 - eccentricity**2)


def ellipse_arclength(a, b, u):
    """Arc length from ``(a, 0)`` to the point ``(a cos u, b sin u)``."""
    e2 = 1.0 - (b / a) ** 2
    u = np.asarray(u, dtype=float)
    return a * (ellipe(e2) - ellipeinc(np.pi / 2 - u, e2))


def ellipse_parameter(a, b, q1):
    """Inverse of :func:`ellipse_arclength` (Newton iteration)."""
    q = np.asarray(q1, dtype=float)
    perim = ellipse_perimeter(a, b)
    u = 2 * np.pi * q / perim
    for _ in range(50):
        speed = np.sqrt(a**2 * np.sin(u) ** 2 + b**2 * np.cos(u) ** 2)
        du = (ellipse_arclength(a, b, u) - q) / speed
        u = u - du
        if np.all(np.abs(du) < 1e-15 * max(1.0, np.max(np.abs(u)))):
            break
    return u


def ellipse_curvature_u(a, b, u):
    u = np.asarray(u, dtype=float)
    return a * b / (b**2 * np.cos(u) ** 2 + a**2 * np.sin(u) ** 2) ** 1.5


# evaluation ----------------------------------------------------------------------

def sign_mask(profile: CurvatureProfile, q1):
    q = np.asarray(q1, dtype=float)
    if not profile.sign_changes:
        return np.ones_like(q)
    flips = np.searchsorted(np.asarray(profile.sign_changes), q, side="right")
    n = len(profile.sign_changes)
    return np.where((n - flips) % 2 == 0, 1.0, -1.0)


def _unsigned_curvature(profile, q):
    p = profile.params
    if profile.kind == "straight":
        return np.zeros_like(q)
    if profile.kind == "circle":
        return np.full_like(q, 1.0 / p["radius"])
    if profile.kind == "poschl_teller":
        nu, alpha = p["nu"], p["alpha"]
        return 2 * alpha * np.sqrt(nu * (nu + 1)) / np.cosh(alpha * q)
    if profile.kind == "sukumar":
        k2 = sukumar_curvature_squared(p["eta"], q)
        if np.any(k2 < -1e-12):
            raise ArithmeticError("negative squared curvature in determinant formula")
        return np.sqrt(np.clip(k2, 0.0, None))
    if profile.kind == "ellipse":
        a, b = p["a"], p["b"]
        u = ellipse_parameter(a, b, np.mod(q, ellipse_perimeter(a, b)))
        return ellipse_curvature_u(a, b, u)
    raise AssertionError(profile.kind)


def _check_domain(profile, q):
    lo, hi = profile.domain
    if q.size and (np.min(q) < lo - 1e-12 or np.max(q) > hi + 1e-12):
        raise ValueError(f"q1 outside tabulated domain [{lo}, {hi}]")


def evaluate_curvature(profile: CurvatureProfile, q1):
    """Signed curvature at arc length ``q1`` (sign mask applied)."""
    q = np.asarray(q1, dtype=float)
    if profile.kind == "tabulated":
        _check_domain(profile, q)
        k = CubicSpline(profile.params["q1"], profile.params["kappa"])(q)
    else:
        k = _unsigned_curvature(profile, q)
    out = k * sign_mask(profile, q)
    return float(out) if np.ndim(out) == 0 else out


def curvature_squared(profile: CurvatureProfile, q1):
    """``kappa(q1)**2``; the Sukumar kind is evaluated without the square root."""
    q = np.asarray(q1, dtype=float)
    if profile.kind == "sukumar":
        out = np.clip(sukumar_curvature_squared(profile.params["eta"], q), 0.0, None)
    else:
        out = np.asarray(evaluate_curvature(profile, q)) ** 2
    return float(out) if np.ndim(out) == 0 else out


# sampled curves -------------------------------------------------------------------

@dataclass
class SampledCurve:
    """Arc-length sampled curve.

    ``points`` has shape ``(N, 2)`` or ``(N, 3)``; ``arc_q1`` is the arc
    length of each sample.  ``theta`` is the planar tangent angle and
    ``frame`` an optional ``(t, n, b)`` triple of ``(N, 3)`` arrays.
    """

    points: np.ndarray
    arc_q1: np.ndarray
    theta: Optional[np.ndarray] = None
    frame: Optional[tuple] = None

    @property
    def is_planar(self) -> bool:
        return self.points.shape[1] == 2

    @property
    def step(self) -> float:
        return float(np.median(np.diff(self.arc_q1)))

    def __len__(self):
        return len(self.arc_q1)

    def chord_length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.points, axis=0), axis=1)))

    def transformed(self, angle=0.0, shift=(0.0, 0.0)):
        """Planar curve rotated by ``angle`` about the origin, then shifted."""
        if not self.is_planar:
            raise ValueError("rigid motions are only provided for planar curves")
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        pts = self.points @ rot.T + np.asarray(shift, dtype=float)
        theta = None if self.theta is None else self.theta + angle
        frame = None
        if self.frame is not None:
            rot3 = np.eye(3)
            rot3[:2, :2] = rot
            frame = tuple(f @ rot3.T for f in self.frame)
        return SampledCurve(pts, self.arc_q1.copy(), theta, frame)


def _signed_integral(profile, a, b):
    """Simpson integral of the signed curvature over ``[a, b]``, split at
    sign changes so each piece sees one-sided values."""
    base = dataclasses.replace(profile, sign_changes=())
    lo, hi = min(a, b), max(a, b)
    cuts = [c for c in profile.sign_changes if lo < c < hi]
    edges = [lo] + cuts + [hi]
    total = 0.0
    for u, w in zip(edges[:-1], edges[1:]):
        m = 0.5 * (u + w)
        k = np.asarray(evaluate_curvature(base, np.array([u, m, w])), dtype=float)
        total += float(sign_mask(profile, m)) * (w - u) / 6.0 * (k[0] + 4 * k[1] + k[2])
    return total if b >= a else -total


def _planar_angle_and_position(profile, s0, h, n):
    """Tangent angle and position on ``s0 + h*arange(n+1)`` anchored at 0."""
    nodes = s0 + h * np.arange(n + 1)
    mids = nodes[:-1] + 0.5 * h
    # unsigned values with one sign per interval: a change sitting on a node
    # must not leak into the neighbouring interval
    base = dataclasses.replace(profile, sign_changes=())
    k_nodes = np.asarray(evaluate_curvature(base, nodes), dtype=float)
    k_mids = np.asarray(evaluate_curvature(base, mids), dtype=float)
    sg = sign_mask(profile, mids)

    # Simpson increments of theta per interval, and theta at interval midpoints
    # relative to the left node from the quadratic interpolant.
    dth = sg * h / 6.0 * (k_nodes[:-1] + 4 * k_mids + k_nodes[1:])
    dth_half = sg * h / 24.0 * (5 * k_nodes[:-1] + 8 * k_mids - k_nodes[1:])
    for c in profile.sign_changes:
        i = int(math.floor((c - s0) / h))
        if 0 <= i < n and nodes[i] < c < nodes[i + 1]:
            dth[i] = _signed_integral(profile, nodes[i], nodes[i + 1])
            dth_half[i] = _signed_integral(profile, nodes[i], mids[i])

    lo, hi = nodes[0], nodes[-1]
    anchor = 0.0 if lo <= 0.0 <= hi else lo
    j = int(np.clip(round((anchor - lo) / h), 0, n))
    delta = nodes[j] - anchor
    if delta != 0.0:
        theta_j = _signed_integral(profile, anchor, nodes[j])
        theta_m = _signed_integral(profile, anchor, anchor + 0.5 * delta)
        xj = delta / 6.0 * (1.0 + 4 * math.cos(theta_m) + math.cos(theta_j))
        yj = delta / 6.0 * (0.0 + 4 * math.sin(theta_m) + math.sin(theta_j))
    else:
        theta_j = xj = yj = 0.0

    theta = np.empty(n + 1)
    theta[j] = theta_j
    theta[j + 1:] = theta_j + np.cumsum(dth[j:])
    theta[:j] = theta_j - np.cumsum(dth[:j][::-1])[::-1]
    th_mid = theta[:-1] + dth_half

    dx = h / 6.0 * (np.cos(theta[:-1]) + 4 * np.cos(th_mid) + np.cos(theta[1:]))
    dy = h / 6.0 * (np.sin(theta[:-1]) + 4 * np.sin(th_mid) + np.sin(theta[1:]))
    x = np.empty(n + 1)
    y = np.empty(n + 1)
    for out, d, v0 in ((x, dx, xj), (y, dy, yj)):
        out[j] = v0
        out[j + 1:] = v0 + np.cumsum(d[j:])
        out[:j] = v0 - np.cumsum(d[:j][::-1])[::-1]
    return nodes, theta, x, y


def integrate_frenet_serret(profile: CurvatureProfile, q1_min, q1_max, step, frame=False):
    """Sample the curve with the given curvature profile.

    The tangent angle is integrated with fourth-order (Simpson/RK4) steps and
    the position with the matching composite Simpson rule.  The sample spacing
    is the largest ``h <= step`` that divides ``[q1_min, q1_max]``.  The
    curve passes through the origin with ``theta = 0`` at ``q1 = 0`` (at
    ``q1_min`` when 0 lies outside the interval).

    With torsion ``tau > 0`` the planar curve over ``s in [q1_min, q1_max]``
    is lifted to ``(x(s), y(s), tau s)`` and ``arc_q1 = sqrt(1 + tau**2) s``.
    """
    if not step > 0:
        raise ValueError("step must be > 0")
    if not q1_max > q1_min:
        raise ValueError("need q1_min < q1_max")
    if profile.kind == "tabulated":
        _check_domain(profile, np.array([q1_min, q1_max]))
    n = max(int(math.ceil((q1_max - q1_min) / step - 1e-9)), 1)
    h = (q1_max - q1_min) / n
    s, theta, x, y = _planar_angle_and_position(profile, q1_min, h, n)

    tau = profile.torsion
    if tau == 0.0:
        pts = np.column_stack([x, y])
        arc = s
        tangent = np.column_stack([np.cos(theta), np.sin(theta), np.zeros_like(theta)])
    else:
        pts = np.column_stack([x, y, tau * s])
        c = math.sqrt(1.0 + tau**2)
        arc = c * s
        tangent = np.column_stack([np.cos(theta), np.sin(theta), np.full_like(theta, tau)]) / c
    fr = None
    if frame:
        normal = np.column_stack([-np.sin(theta), np.cos(theta), np.zeros_like(theta)])
        fr = (tangent, normal, np.cross(tangent, normal))
    return SampledCurve(pts, arc, theta, fr)


# self-intersections -------------------------------------------------------------

@dataclass(frozen=True)
class Crossing:
    q1_a: float
    q1_b: float
    point: tuple
    degenerate: bool = False


def _candidate_pairs(p0, p1):
    """Index pairs of segments sharing a cell of a uniform bucket grid."""
    seg_len = np.linalg.norm(p1 - p0, axis=1)
    cell = max(float(np.max(seg_len)) * 1.01, 1e-12)
    lo = np.floor(np.minimum(p0, p1) / cell).astype(np.int64)
    hi = np.floor(np.maximum(p0, p1) / cell).astype(np.int64)
    ids, keys = [], []
    origin = lo.min(axis=0)
    span = (hi.max(axis=0) - origin) + 2
    for ox in (0, 1):
        for oy in (0, 1):
            cx = lo[:, 0] + ox
            cy = lo[:, 1] + oy
            ok = (cx <= hi[:, 0]) & (cy <= hi[:, 1])
            idx = np.nonzero(ok)[0]
            ids.append(idx)
            keys.append((cx[idx] - origin[0]) * span[1] + (cy[idx] - origin[1]))
    ids = np.concatenate(ids)
    keys = np.concatenate(keys)
    order = np.lexsort((ids, keys))
    ids, keys = ids[order], keys[order]
    pairs = []
    d = 1
    while d < len(ids):
        same = keys[d:] == keys[:-d]
        if not same.any():
            break
        pairs.append(np.column_stack([ids[:-d][same], ids[d:][same]]))
        d += 1
    if not pairs:
        return np.empty((0, 2), dtype=np.int64)
    pairs = np.sort(np.concatenate(pairs), axis=1)
    return np.unique(pairs, axis=0)


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def detect_self_intersections(curve: SampledCurve, adjacency=None, tol=1e-9):
    """Crossings of non-adjacent polyline segments.

    Pairs whose crossing lies within ``adjacency`` (default ``2 * step``) of
    each other in arc length are ignored, and crossings closer than that in
    both arc lengths are merged.  Space curves only report samples that
    coincide within ``tol``.
    """
    pts = np.asarray(curve.points, dtype=float)
    q = np.asarray(curve.arc_q1, dtype=float)
    if len(q) < 3:
        return []
    step = curve.step
    adjacency = 2 * step if adjacency is None else adjacency

    if not curve.is_planar:
        from scipy.spatial import cKDTree

        pairs = np.array(sorted(cKDTree(pts).query_pairs(tol)), dtype=np.int64).reshape(-1, 2)
        raw = [(q[i], q[j], tuple(pts[i]), False) for i, j in pairs if abs(q[j] - q[i]) > adjacency]
        return _merge(raw, adjacency)

    p0, p1 = pts[:-1], pts[1:]
    cand = _candidate_pairs(p0, p1)
    if len(cand) == 0:
        return []
    i, j = cand[:, 0], cand[:, 1]
    r = p1[i] - p0[i]
    s = p1[j] - p0[j]
    qp = p0[j] - p0[i]
    denom = _cross(r, s)
    scale = np.linalg.norm(r, axis=1) * np.linalg.norm(s, axis=1)
    parallel = np.abs(denom) <= 1e-12 * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        t = _cross(qp, s) / denom
        u = _cross(qp, r) / denom
    eps = 1e-12
    hit = ~parallel & (t >= -eps) & (t <= 1 + eps) & (u >= -eps) & (u <= 1 + eps)

    raw = []
    for k in np.nonzero(hit)[0]:
        qa = q[i[k]] + t[k] * (q[i[k] + 1] - q[i[k]])
        qb = q[j[k]] + u[k] * (q[j[k] + 1] - q[j[k]])
        if abs(qb - qa) <= adjacency:
            continue
        raw.append((qa, qb, tuple(p0[i[k]] + t[k] * r[k]), False))

    # collinear overlaps
    coll = parallel & (np.abs(_cross(qp, r)) <= 1e-12 * np.maximum(scale, 1e-300))
    for k in np.nonzero(coll)[0]:
        rr = float(r[k] @ r[k])
        if rr == 0:
            continue
        t0 = float(qp[k] @ r[k]) / rr
        t1 = t0 + float(s[k] @ r[k]) / rr
        lo_, hi_ = max(min(t0, t1), 0.0), min(max(t0, t1), 1.0)
        if lo_ > hi_:
            continue
        tm = 0.5 * (lo_ + hi_)
        qa = q[i[k]] + tm * (q[i[k] + 1] - q[i[k]])
        pm = p0[i[k]] + tm * r[k]
        uu = float((pm - p0[j[k]]) @ s[k]) / float(s[k] @ s[k])
        qb = q[j[k]] + uu * (q[j[k] + 1] - q[j[k]])
        if abs(qb - qa) <= adjacency:
            continue
        raw.append((qa, qb, tuple(pm), True))
    return _merge(raw, adjacency)


def _merge(raw, adjacency):
    raw = sorted((min(a, b), max(a, b), p, d) for a, b, p, d in raw)
    out = []
    for qa, qb, p, deg in raw:
        if out and abs(out[-1].q1_a - qa) <= adjacency and abs(out[-1].q1_b - qb) <= adjacency:
            if deg and not out[-1].degenerate:
                out[-1] = dataclasses.replace(out[-1], degenerate=True)
            continue
        out.append(Crossing(float(qa), float(qb), tuple(float(c) for c in p), deg))
    return out


# validity of the dimensional reduction ----------------------------------------------

@dataclass(frozen=True)
class ValidityReport:
    max_k_sigma: Optional[float]
    max_kprime_ratio: Optional[float]
    max_kpp_ratio: Optional[float]
    evaluated_domain: Optional[tuple]
    verdict: str
    thresholds: tuple = (0.1, 0.1, 0.1)


def check_validity(profile: CurvatureProfile, sigma0=1.0, domain=None, kappa_floor=None,
                   thresholds=(0.1, 0.1, 0.1), n_samples=20001):
    """Check ``kappa sigma0 << 1``, ``|kappa'| sigma0 << |kappa|`` and
    ``|kappa''| sigma0 << kappa**2`` on a fine grid.

    The ratios are only evaluated where ``|kappa| >= kappa_floor`` (default
    ``1e-6 / sigma0``).  The verdict is ``"pass"`` when all three maxima are
    below their thresholds, ``"fail"`` when any of them reaches 1 and
    ``"warn"`` otherwise (or when nothing exceeds the floor).
    """
    if not sigma0 > 0:
        raise ValueError("sigma0 must be > 0")
    kappa_floor = 1e-6 / sigma0 if kappa_floor is None else kappa_floor
    if not kappa_floor > 0:
        raise ValueError("kappa_floor must be > 0")
    if domain is None:
        perim = profile.perimeter
        if perim is not None:
            domain = (0.0, perim)
        elif profile.kind == "tabulated":
            domain = profile.domain
        else:
            raise ValueError("domain is required for open profiles")
    lo, hi = map(float, domain)
    q = np.linspace(lo, hi, n_samples)
    h = q[1] - q[0]
    k = np.abs(np.asarray(evaluate_curvature(profile.with_mask(()), q)))
    k1 = np.abs(_fd.derivative(k, h, 1))
    k2 = np.abs(_fd.derivative(k, h, 2))
    sel = k >= kappa_floor
    if not sel.any():
        return ValidityReport(None, None, None, None, "warn", tuple(thresholds))
    m0 = float(np.max(k[sel]) * sigma0)
    m1 = float(np.max(k1[sel] * sigma0 / k[sel]))
    m2 = float(np.max(k2[sel] * sigma0 / k[sel] ** 2))
    vals = (m0, m1, m2)
    if all(v < t for v, t in zip(vals, thresholds)):
        verdict = "pass"
    elif any(v >= 1.0 for v in vals):
        verdict = "fail"
    else:
        verdict = "warn"
    dom = (float(q[sel][0]), float(q[sel][-1]))
    return ValidityReport(m0, m1, m2, dom, verdict, tuple(thresholds))


# curvature reconstruction -------------------------------------------------------------

def reconstruct_curvature(curve: SampledCurve) -> CurvatureProfile:
    """Curvature recovered from the samples by finite differences.

    Planar curves give the signed curvature ``(r' x r'') / |r'|**3``; space
    curves give ``|r' x r''| / |r'|**3``.  Requires uniform arc-length
    spacing and at least 5 samples.
    """
    r = np.asarray(curve.points, dtype=float)
    q = np.asarray(curve.arc_q1, dtype=float)
    if len(q) < 5:
        raise ValueError("need at least 5 samples")
    dq = np.diff(q)
    h = float(np.mean(dq))
    if np.max(np.abs(dq - h)) > 1e-9 * max(1.0, abs(h)):
        raise ValueError("arc-length spacing must be uniform")
    d1 = np.empty_like(r)
    d2 = np.empty_like(r)
    d1[1:-1] = (r[2:] - r[:-2]) / (2 * h)
    d2[1:-1] = (r[2:] - 2 * r[1:-1] + r[:-2]) / h**2
    d1[0] = (-3 * r[0] + 4 * r[1] - r[2]) / (2 * h)
    d1[-1] = (3 * r[-1] - 4 * r[-2] + r[-3]) / (2 * h)
    d2[0] = (2 * r[0] - 5 * r[1] + 4 * r[2] - r[3]) / h**2
    d2[-1] = (2 * r[-1] - 5 * r[-2] + 4 * r[-3] - r[-4]) / h**2
    speed = np.linalg.norm(d1, axis=1)
    if curve.is_planar:
        kappa = _cross(d1, d2) / speed**3
    else:
        kappa = np.linalg.norm(np.cross(d1, d2), axis=1) / speed**3
    return CurvatureProfile.tabulated(q, kappa)
