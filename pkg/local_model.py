"""Local model of a Dehn twist on T = T*S^n.

T is realised as {(u, v) in R^{n+1} x R^{n+1} : <u, v> = 0, |v| = 1}, with
u the cotangent coordinate and v the base point. Conventions:

    theta_T = u . dv          omega_T = du ^ dv          mu(u, v) = |u|

On C^{n+1} with x = a + ib, theta = (a . db - b . da) / 2.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from errors import InvalidParameter, NoSolution, OnSigma, ZeroSection

logger = logging.getLogger(__name__)

ZERO_SECTION_TOL = 1e-12
INVARIANT_TOL = 1e-9
FD_STEP = 1e-5
BISECTION_CAP = 200
WOBBLY_GRID = 10_000


# ---------------------- points ----------------------

@dataclass(frozen=True, eq=False)
class CotangentPoint:
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).reshape(-1)
        v = np.asarray(self.v, dtype=float).reshape(-1)
        if u.shape != v.shape or u.size < 2:
            raise InvalidParameter("u and v must be vectors of the same length n+1 >= 2")
        if abs(float(u @ v)) > INVARIANT_TOL or abs(float(np.linalg.norm(v)) - 1.0) > INVARIANT_TOL:
            raise InvalidParameter("point is not on T: need <u,v> = 0 and |v| = 1")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return self.u.size - 1

    @property
    def mu(self) -> float:
        return float(np.linalg.norm(self.u))

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.u, self.v])

    def distance(self, other: "CotangentPoint") -> float:
        return float(np.linalg.norm(self.as_array() - other.as_array()))


@dataclass(frozen=True, eq=False)
class QuadricPoint:
    x: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=complex).reshape(-1))


def random_point(rng: np.random.Generator, n: int, mu_range: tuple[float, float] = (0.1, 1.2)) -> CotangentPoint:
    v = rng.standard_normal(n + 1)
    v /= np.linalg.norm(v)
    u = rng.standard_normal(n + 1)
    u -= (u @ v) * v
    u *= rng.uniform(*mu_range) / np.linalg.norm(u)
    return CotangentPoint(u, v)


def random_unit_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    y = rng.standard_normal(n + 1)
    return y / np.linalg.norm(y)


# ---------------------- twist profile ----------------------

def tilde_R(s: float, t):
    """R~_s(t) = t/2 - sqrt(t^2 + s^2/4)/2 and its t-derivative."""
    t = np.asarray(t, dtype=float)
    c = s * s / 4.0
    root = np.sqrt(t * t + c)
    naive = 0.5 * t - 0.5 * root
    if c > 0:
        # root - t = c / (root + t), free of cancellation for large positive t
        tp = np.maximum(t, 0.0)
        value = np.where(t >= 0, -0.5 * c / (root + tp), naive)
        deriv = np.where(t >= 0, 0.5 * c / (root * (root + tp)), 0.5 - 0.5 * t / root)
    else:
        value = naive
        deriv = np.where(t < 0, 1.0, 0.0)
    if value.ndim == 0:
        return float(value), float(deriv)
    return value, deriv


def _tilde_R_second(s: float, t):
    t = np.asarray(t, dtype=float)
    c = s * s / 4.0
    if c == 0:
        return np.zeros_like(t)
    return -0.5 * c / (t * t + c) ** 1.5


@dataclass(frozen=True)
class TwistProfile:
    """R_r = (1 - g) R~_r with g the quintic smoothstep from lambda/4 to 3 lambda/4."""

    r: float = 0.05
    lam: float = 1.0

    def __post_init__(self):
        if not 0 < self.r < 0.5:
            raise InvalidParameter(f"twist r must lie in (0; 1/2), got {self.r}")
        if not self.lam > 0:
            raise InvalidParameter(f"twist lambda must be > 0, got {self.lam}")

    # cutoff
    def _ramp(self, t):
        width = self.lam / 2.0
        s = np.clip((np.asarray(t, dtype=float) - self.lam / 4.0) / width, 0.0, 1.0)
        return s, width

    def g(self, t):
        s, _ = self._ramp(t)
        return s ** 3 * (10 - 15 * s + 6 * s * s)

    def g1(self, t):
        s, width = self._ramp(t)
        return 30 * s * s * (1 - s) ** 2 / width

    def g2(self, t):
        s, width = self._ramp(t)
        return 60 * s * (1 - s) * (1 - 2 * s) / width ** 2

    # R and derivatives
    def R(self, t):
        rt, _ = tilde_R(self.r, t)
        return _scalar((1 - self.g(t)) * rt)

    def R1(self, t):
        rt, rt1 = tilde_R(self.r, t)
        return _scalar(-self.g1(t) * rt + (1 - self.g(t)) * rt1)

    def R2(self, t):
        rt, rt1 = tilde_R(self.r, t)
        return _scalar(-self.g2(t) * rt - 2 * self.g1(t) * rt1 + (1 - self.g(t)) * _tilde_R_second(self.r, t))

    def angle(self, mu: float) -> float:
        return 2 * math.pi * float(self.R1(mu))

    def kk(self, t):
        """K as a function of mu: 2 pi (R'(t) t - R(t))."""
        return _scalar(2 * math.pi * (np.asarray(self.R1(t)) * np.asarray(t, dtype=float) - np.asarray(self.R(t))))

    def kk_integral(self, t: float, samples: int = 4001) -> float:
        """-2 pi R(0) + 2 pi int_0^t (R'(t) - R'(tau)) dtau, by the trapezoid rule."""
        tau = np.linspace(0.0, t, samples)
        integrand = float(self.R1(t)) - np.asarray(self.R1(tau))
        return -2 * math.pi * float(self.R(0.0)) + 2 * math.pi * float(np.trapezoid(integrand, tau))

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.lam, WOBBLY_GRID + 1)

    def threshold(self, delta: float) -> float:
        """Largest grid point t with R'(t) >= delta (0 when none)."""
        t = self.grid()
        hits = np.nonzero(np.asarray(self.R1(t)) >= delta)[0]
        return float(t[hits[-1]]) if hits.size else 0.0


def _scalar(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def is_delta_wobbly(P: TwistProfile, delta: float) -> bool:
    if not 0 < delta < 0.5:
        raise InvalidParameter(f"delta must lie in (0; 1/2), got {delta}")
    t = P.grid()
    r1 = np.asarray(P.R1(t))
    r2 = np.asarray(P.R2(t))
    if np.any(r1 < 0):
        logger.debug("R' negative at t=%g", t[np.argmax(r1 < 0)])
        return False
    bad = (r1 >= delta) & (r2 >= 0)
    if np.any(bad):
        logger.debug("R'' >= 0 at t=%g where R' >= %g", t[np.argmax(bad)], delta)
        return False
    return True


# ---------------------- flows and twists ----------------------

def _flow(u: np.ndarray, v: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
    norm = float(np.linalg.norm(u))
    c, s = math.cos(t), math.sin(t)
    return c * u - s * norm * v, c * v + s * u / norm


def _twist(P: TwistProfile, u: np.ndarray, v: np.ndarray, sign: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    norm = float(np.linalg.norm(u))
    if norm < ZERO_SECTION_TOL:
        return -u, -v
    return _flow(u, v, sign * P.angle(norm))


def geodesic_flow(y: CotangentPoint, t: float) -> CotangentPoint:
    if y.mu < ZERO_SECTION_TOL:
        raise ZeroSection("geodesic flow is undefined on the zero section")
    return CotangentPoint(*_flow(y.u, y.v, t))


def antipodal(y: CotangentPoint) -> CotangentPoint:
    return CotangentPoint(-y.u, -y.v)


def model_twist(P: TwistProfile, y: CotangentPoint) -> CotangentPoint:
    return CotangentPoint(*_twist(P, y.u, y.v))


def inverse_twist(P: TwistProfile, y: CotangentPoint) -> CotangentPoint:
    return CotangentPoint(*_twist(P, y.u, y.v, sign=-1.0))


def twist_moment(P: TwistProfile, y: CotangentPoint) -> float:
    return float(P.kk(y.mu))


# ---------------------- finite-difference helpers ----------------------

def tangent_basis(y: CotangentPoint) -> list[np.ndarray]:
    """Orthonormal basis of T_y T inside R^{2n+2}, as (du, dv) stacked vectors."""
    n1 = y.v.size
    # complement of v in R^{n+1}
    q, _ = np.linalg.qr(np.column_stack([y.v, np.eye(n1)]))
    perp = [q[:, k] for k in range(1, n1)]
    basis = [np.concatenate([e, np.zeros(n1)]) for e in perp]
    # moving v along e forces du = -<u,e> v to keep <u,v> = 0
    basis += [np.concatenate([-(y.u @ e) * y.v, e]) for e in perp]
    return basis


def retract(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n1 = z.size // 2
    u, v = z[:n1], z[n1:]
    v = v / np.linalg.norm(v)
    return u - (u @ v) * v, v


def derivative_along(fn: Callable[[np.ndarray, np.ndarray], np.ndarray], y: CotangentPoint,
                     X: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """Central difference of fn along the curve s -> retract(y + sX)."""
    z = y.as_array()
    plus = fn(*retract(z + h * X))
    minus = fn(*retract(z - h * X))
    return (np.asarray(plus) - np.asarray(minus)) / (2 * h)


def omega(X: np.ndarray, Y: np.ndarray) -> float:
    n1 = X.size // 2
    return float(X[:n1] @ Y[n1:] - X[n1:] @ Y[:n1])


def symplectic_defect(P: TwistProfile, y: CotangentPoint, h: float = FD_STEP) -> float:
    """max |omega(D tau E_i, D tau E_j) - omega(E_i, E_j)| over a tangent basis."""
    basis = tangent_basis(y)
    images = [derivative_along(lambda u, v: np.concatenate(_twist(P, u, v)), y, E, h) for E in basis]
    worst = 0.0
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            worst = max(worst, abs(omega(images[i], images[j]) - omega(basis[i], basis[j])))
    return worst


def exactness_defect(P: TwistProfile, y: CotangentPoint, X: np.ndarray, h: float = FD_STEP) -> float:
    """|(tau^* theta - theta)(X) - dK(X)| for one tangent vector X."""
    n1 = y.v.size
    tu, _ = _twist(P, y.u, y.v)
    image = derivative_along(lambda u, v: np.concatenate(_twist(P, u, v)), y, X, h)
    pulled = float(tu @ image[n1:])
    theta = float(y.u @ X[n1:])
    dK = float(derivative_along(lambda u, v: np.array(P.kk(float(np.linalg.norm(u)))), y, X, h))
    return abs(pulled - theta - dK)


# ---------------------- fibre intersections ----------------------

@dataclass(frozen=True, eq=False)
class FibreIntersection:
    point: CotangentPoint
    transverse: bool
    residual: float
    fibre_error: float
    antipodal: bool


@dataclass(frozen=True)
class TangentSlopes:
    """Complex slopes of three Lagrangian planes in T_y T = C^n, with X = du + i dv."""

    twisted_fibre: complex
    zero_section: complex
    fibre: complex
    spread: float


def _unit(y, name: str) -> np.ndarray:
    y = np.asarray(y, dtype=float).reshape(-1)
    if abs(float(np.linalg.norm(y)) - 1.0) > INVARIANT_TOL:
        raise InvalidParameter(f"{name} must be a unit vector")
    return y


def sphere_distance(y0, y1) -> float:
    return math.acos(max(-1.0, min(1.0, float(np.dot(y0, y1)))))


def fibre_twist_intersection(P: TwistProfile, y0, y1, delta: float) -> FibreIntersection:
    """The point of tau(F_y0) n F_y1, where F_y is the cotangent fibre over y."""
    y0, y1 = _unit(y0, "y0"), _unit(y1, "y1")
    if y0.shape != y1.shape:
        raise InvalidParameter("y0 and y1 live in different dimensions")
    if not is_delta_wobbly(P, delta):
        raise InvalidParameter(f"profile is not {delta}-wobbly")
    d = sphere_distance(y0, y1)
    if d < 2 * math.pi * delta:
        raise NoSolution(f"dist(y0, y1) = {d:.6g} < 2 pi delta = {2 * math.pi * delta:.6g}")

    if math.pi - d < 1e-9:
        point = CotangentPoint(np.zeros_like(y1), y1)
        m, is_antipodal = 0.0, True
    else:
        e = (math.cos(d) * y1 - y0) / math.sin(d)
        lo, hi = 0.0, P.threshold(delta) + P.lam / WOBBLY_GRID
        for _ in range(BISECTION_CAP):
            mid = 0.5 * (lo + hi)
            if P.angle(mid) >= d:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15:
                break
        m = 0.5 * (lo + hi)
        point = CotangentPoint(m * e, y1)
        is_antipodal = False

    residual = abs(P.angle(m) - d) if not is_antipodal else 0.0
    back = inverse_twist(P, point)
    fibre_error = float(np.linalg.norm(back.v - y0))
    transverse = float(P.R2(m)) < 0
    return FibreIntersection(point, transverse, residual, fibre_error, is_antipodal)


def tangent_slopes(P: TwistProfile, y0, h: float = FD_STEP) -> TangentSlopes:
    """Slopes at the antipodal intersection point over -y0, by finite differences."""
    y0 = _unit(y0, "y0")
    base = CotangentPoint(np.zeros_like(y0), y0)
    slopes = []
    for k, E in enumerate(tangent_basis(base)[: y0.size - 1]):
        a = E[: y0.size]
        img = derivative_along(lambda u, v: np.concatenate(_twist(P, u, v)), base, E, h)
        du, dv = img[: y0.size], img[y0.size:]
        slopes.append(complex(1.0, float(dv @ a) / float(du @ a)))
    spread = max(abs(s - slopes[0]) for s in slopes)
    return TangentSlopes(twisted_fibre=slopes[0], zero_section=1j, fibre=1 + 0j, spread=spread)


# ---------------------- quadric fibration ----------------------

@dataclass(frozen=True, eq=False)
class QuadricImage:
    q: complex
    h: float
    phi: tuple[complex, CotangentPoint] | None
    mu: float | None
    alpha: float


def quadric_q(x: np.ndarray) -> complex:
    return complex(np.sum(x * x))


def quadric_h(x: np.ndarray) -> float:
    return float(np.vdot(x, x).real ** 2 - abs(quadric_q(x)) ** 2)


def quadric_maps(x: QuadricPoint, with_phi: bool = True) -> QuadricImage:
    q = quadric_q(x.x)
    h = max(quadric_h(x.x), 0.0)
    alpha = math.atan2(q.imag, q.real)
    if not with_phi:
        return QuadricImage(q, h, None, None, alpha)
    if h <= 1e-12:
        raise OnSigma(f"h(x) = {h:.3g}: x lies on Sigma")
    xhat = np.exp(-0.5j * alpha) * x.x
    p, w = xhat.real, xhat.imag
    norm_p = float(np.linalg.norm(p))
    u0, v0 = -w * norm_p, p / norm_p
    point = CotangentPoint(*_flow(u0, v0, alpha / 2))
    return QuadricImage(q, h, (q, point), 0.5 * math.sqrt(h), alpha)


def phi_closed_form(x: QuadricPoint) -> tuple[complex, CotangentPoint]:
    """Phi without polar coordinates, smooth across q = 0."""
    xv = x.x
    q = quadric_q(xv)
    h = quadric_h(xv)
    if h <= 1e-12:
        raise OnSigma(f"h(x) = {h:.3g}: x lies on Sigma")
    beta = math.sqrt(float(np.vdot(xv, xv).real) + math.sqrt(h))
    qx = np.conj(q) * xv
    u = -0.5 * xv.imag * beta - 0.5 * qx.imag / beta
    v = (xv.real * beta - qx.real / beta) / math.sqrt(h)
    return q, CotangentPoint(u, v)


def theta_C(x: np.ndarray, X: np.ndarray) -> float:
    return 0.5 * float(x.real @ X.imag - x.imag @ X.real)


def pullback_defect(x: QuadricPoint, X: np.ndarray, h: float = FD_STEP) -> float:
    """|theta_C(X) - theta_T(D Phi X) + R~_s(mu) d alpha(X)|, s = |q(x)|."""
    X = np.asarray(X, dtype=complex)
    image = quadric_maps(x)
    _, y = image.phi

    def phi_uv(z):
        _, pt = quadric_maps(QuadricPoint(z)).phi
        return pt.as_array()

    n1 = x.x.size
    # Phi is continuous across the branch cut of alpha, so no unwrapping
    dphi = (phi_uv(x.x + h * X) - phi_uv(x.x - h * X)) / (2 * h)
    theta_T = float(y.u @ dphi[n1:])
    dq = complex(np.sum(2 * x.x * X))
    dalpha = (dq / image.q).imag
    rt, _ = tilde_R(abs(image.q), image.mu)
    return abs(theta_C(x.x, X) - theta_T + rt * dalpha)


def sigma_distance(w: np.ndarray, z: complex) -> float:
    """Distance from w to Sigma_z = sqrt(z) S^n."""
    root = np.sqrt(complex(z))
    if abs(root) == 0:
        return float(np.linalg.norm(w))
    y = np.asarray(w, dtype=complex) / root
    re = y.real
    nearest = re / np.linalg.norm(re) if np.linalg.norm(re) > 0 else np.eye(re.size)[0]
    return float(np.linalg.norm(w - root * nearest))


# ---------------------- sections ----------------------

@dataclass(frozen=True, eq=False)
class Section:
    """w(z) = s^{-1/2} a z + s^{1/2} conj(a); q(w(z)) = z when q(a) = 0, |a|^2 = 1/2."""

    s: float
    a: np.ndarray
    valid: bool

    def __call__(self, z: complex) -> np.ndarray:
        return self.a * (complex(z) / math.sqrt(self.s)) + math.sqrt(self.s) * np.conj(self.a)

    def evaluation(self) -> CotangentPoint:
        return evaluation(self.a)


def section_moduli(s: float, a, check: bool = True) -> Section:
    if not s > 0:
        raise InvalidParameter(f"section radius must be > 0, got {s}")
    a = np.asarray(a, dtype=complex).reshape(-1)
    valid = abs(quadric_q(a)) <= INVARIANT_TOL and abs(float(np.vdot(a, a).real) - 0.5) <= INVARIANT_TOL
    if check and not valid:
        raise InvalidParameter("section parameter needs q(a) = 0 and |a|^2 = 1/2")
    return Section(s, a, valid)


def evaluation(a) -> CotangentPoint:
    a = np.asarray(a, dtype=complex)
    return CotangentPoint(-2 * a.imag, 2 * a.real)


def from_sphere_bundle(u, v) -> np.ndarray:
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    if abs(float(np.linalg.norm(u)) - 1) > INVARIANT_TOL:
        raise InvalidParameter("u must be a unit covector")
    return 0.5 * (v - 1j * u)


def parametrized_evaluation(t: float, u, v) -> tuple[float, np.ndarray, np.ndarray]:
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    return t, v, -math.cos(math.pi * t) * v - math.sin(math.pi * t) * u
