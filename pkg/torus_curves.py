"""Straight and piecewise-linear curves on the square torus R^2/Z^2.

A SlopeCurve with direction (p, q) and offset c is the line q x - p y = c
(mod 1). Points are pairs of Fractions, so intersections and vertex
coincidences are decided exactly.

Twist convention: det(A, B) = p_A q_B - q_A p_B and the twist along L sends
[A] to [A] + conv * det(A, L) [L], conv = +1 by default.
"""
from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Mapping

import numpy as np

from errors import ConditionsUnsatisfiable, ExactnessViolation, InvalidParameter, NonGeneric, NonTransverse, TriplePoint, WidthTooLarge
from graded_gf2 import (DifferentialSpace, ExactTriple, GradedSpace, OrderInterval, OrderMap, all_passed, total_complex,
                         verify_triple)

logger = logging.getLogger(__name__)

Point = tuple[Fraction, Fraction]
QUANTUM = 1024
MAX_DRAWS = 1000


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (abs(a), 1 if a >= 0 else -1, 0)
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


def _frac_part(x: Fraction) -> Fraction:
    return x - math.floor(x)


def _dist_to_integer(x: Fraction) -> Fraction:
    f = _frac_part(x)
    return min(f, 1 - f)


# ---------------------- curves ----------------------

@dataclass(frozen=True)
class SlopeCurve:
    p: int
    q: int
    offset: Fraction = Fraction(0)

    def __post_init__(self):
        if (self.p, self.q) == (0, 0) or math.gcd(self.p, self.q) != 1:
            raise InvalidParameter(f"direction ({self.p}, {self.q}) is not primitive")
        object.__setattr__(self, "offset", _frac_part(Fraction(self.offset)))

    @property
    def direction(self) -> tuple[int, int]:
        return self.p, self.q

    def level(self, point: Point) -> Fraction:
        """q x - p y - offset; integer exactly on the curve."""
        return self.q * point[0] - self.p * point[1] - self.offset

    def contains(self, point: Point) -> bool:
        return self.level(point).denominator == 1

    def base_point(self) -> Point:
        # q x0 - p y0 = 1 for integers x0, y0
        _, s, t = _ext_gcd(self.q, -self.p)
        return _frac_part(self.offset * s), _frac_part(self.offset * t)

    def position(self, point: Point) -> Fraction:
        """S^1 coordinate of a point of the curve: point = base + s (p, q) mod 1."""
        _, y, x = _ext_gcd(self.p, -self.q)  # p y - q x = 1
        bx, by = self.base_point()
        return _frac_part(y * (point[0] - bx) - x * (point[1] - by))

    def with_offset(self, offset) -> "SlopeCurve":
        return SlopeCurve(self.p, self.q, Fraction(offset))

    def __str__(self) -> str:
        return f"({self.p},{self.q})+{self.offset}"


@dataclass(frozen=True)
class PLCurve:
    vertices: tuple[Point, ...]

    def __post_init__(self):
        verts = tuple((_frac_part(Fraction(x)), _frac_part(Fraction(y))) for x, y in self.vertices)
        if len(verts) < 2:
            raise InvalidParameter("a closed PL curve needs at least two vertices")
        for a, b in zip(verts, verts[1:] + verts[:1]):
            if a == b:
                raise InvalidParameter("consecutive vertices must be distinct")
        object.__setattr__(self, "vertices", verts)

    def edges(self) -> list[tuple[Point, Point]]:
        """Edges as (start, lifted end) with the end at the shortest lift."""
        out = []
        verts = self.vertices
        for a, b in zip(verts, verts[1:] + verts[:1]):
            dx, dy = _shortest(b[0] - a[0]), _shortest(b[1] - a[1])
            out.append((a, (a[0] + dx, a[1] + dy)))
        return out


def _shortest(d: Fraction) -> Fraction:
    d = _frac_part(d)
    return d - 1 if d > Fraction(1, 2) else d


# ---------------------- basic operations ----------------------

def det_pair(A: SlopeCurve, B: SlopeCurve) -> int:
    return A.p * B.q - A.q * B.p


def parallel(A: SlopeCurve, B: SlopeCurve) -> bool:
    return det_pair(A, B) == 0


def coincide(A: SlopeCurve, B: SlopeCurve) -> bool:
    if not parallel(A, B):
        return False
    if (A.p, A.q) == (B.p, B.q):
        return A.offset == B.offset
    return A.offset == _frac_part(-B.offset)


def intersections(A: SlopeCurve, B: SlopeCurve) -> list[Point]:
    if coincide(A, B):
        raise NonTransverse(f"curves {A} and {B} coincide")
    det = det_pair(A, B)
    if det == 0:
        return []
    # walk A from its base point: B.level grows by det per unit of A's period
    bx, by = A.base_point()
    f0 = B.level((bx, by))
    n = abs(det)
    points = set()
    for k in range(math.floor(f0) - n, math.floor(f0) + n + 1):
        t = (k - f0) / det
        if 0 <= t < 1:
            points.add((_frac_part(bx + t * A.p), _frac_part(by + t * A.q)))
    out = sorted(points)
    if len(out) != n:
        raise ExactnessViolation(f"found {len(out)} intersections of {A} and {B}, expected {n}")
    return out


def twist_slope(L: SlopeCurve, A: SlopeCurve, conv: int = 1) -> SlopeCurve:
    _check_conv(conv)
    k = conv * det_pair(A, L)
    return SlopeCurve(A.p + k * L.p, A.q + k * L.q, A.offset)


def _check_conv(conv: int) -> None:
    if conv not in (1, -1):
        raise InvalidParameter(f"twist convention must be +1 or -1, got {conv}")


def primitive_slopes(bound: int) -> list[tuple[int, int]]:
    """Primitive directions with |p|, |q| <= bound, one per +- pair."""
    out = []
    for p in range(0, bound + 1):
        for q in range(-bound, bound + 1):
            if math.gcd(p, q) != 1 or (p == 0 and q <= 0):
                continue
            out.append((p, q))
    return sorted(out)


def crossing_gap(L: SlopeCurve, A: SlopeCurve, B: SlopeCurve | None = None) -> Fraction:
    """Smallest vertical gap, in L-adapted coordinates, that a splice strip must respect."""
    d0 = abs(det_pair(A, L))
    if d0 == 0:
        raise InvalidParameter(f"{A} is parallel to {L}")
    gap = Fraction(1, d0)
    if B is not None:
        for pt in intersections(A, B):
            gap = min(gap, _dist_to_integer(L.level(pt)))
    return gap


# ---------------------- twisted PL curve ----------------------

def twisted_pl_curve(L: SlopeCurve, A: SlopeCurve, w=None, conv: int = 1) -> PLCurve:
    """tau_L(A) as a PL curve: A sheared by a full turn inside the strip of
    half-width w around L, straight outside it."""
    _check_conv(conv)
    a2 = -det_pair(A, L)  # vertical component of A in L-adapted coordinates
    if a2 == 0:
        raise InvalidParameter(f"{A} is parallel to {L}; the twist fixes it")
    d0 = abs(a2)
    gap = crossing_gap(L, A)
    w = gap / 10 if w is None else Fraction(w)
    if not 0 < w < gap / 4:
        raise WidthTooLarge(f"width {w} must lie in (0; {gap / 4})")
    T = -conv * (1 if a2 > 0 else -1)
    x0 = intersections(A, L)[0]
    step = w / d0
    lifted: list[Point] = []
    for k in range(d0):
        cx = x0[0] + Fraction(k, d0) * A.p
        cy = x0[1] + Fraction(k, d0) * A.q
        lifted.append((cx - step * A.p + k * T * L.p, cy - step * A.q + k * T * L.q))
        lifted.append((cx + step * A.p + (k + 1) * T * L.p, cy + step * A.q + (k + 1) * T * L.q))
    closing = (lifted[0][0] + A.p + d0 * T * L.p, lifted[0][1] + A.q + d0 * T * L.q)
    vertices: list[Point] = []
    for a, b in zip(lifted, lifted[1:] + [closing]):
        dx, dy = b[0] - a[0], b[1] - a[1]
        pieces = math.floor(2 * max(abs(dx), abs(dy))) + 1
        for j in range(pieces):
            vertices.append((a[0] + dx * Fraction(j, pieces), a[1] + dy * Fraction(j, pieces)))
    return PLCurve(tuple(vertices))


def homology_class(curve: PLCurve) -> tuple[int, int]:
    sx = sum((b[0] - a[0] for a, b in curve.edges()), Fraction(0))
    sy = sum((b[1] - a[1] for a, b in curve.edges()), Fraction(0))
    if sx.denominator != 1 or sy.denominator != 1:
        raise ExactnessViolation("PL curve does not close up on the torus")
    return int(sx), int(sy)


def self_crossings(curve: PLCurve, tol: float = 1e-12) -> int:
    """Number of crossings between non-adjacent edges (0 for an embedded curve)."""
    edges = curve.edges()
    m = len(edges)
    if m < 4:
        return 0
    P = np.array([[float(a[0]), float(a[1])] for a, _ in edges])
    Q = np.array([[float(b[0]), float(b[1])] for _, b in edges])
    count = 0
    for sx, sy in product((-1, 0, 1), repeat=2):
        P2, Q2 = P + (sx, sy), Q + (sx, sy)
        r = Q - P
        s = Q2 - P2
        cross = r[:, None, 0] * s[None, :, 1] - r[:, None, 1] * s[None, :, 0]
        qp = P2[None, :, :] - P[:, None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (qp[..., 0] * s[None, :, 1] - qp[..., 1] * s[None, :, 0]) / cross
            u = (qp[..., 0] * r[:, None, 1] - qp[..., 1] * r[:, None, 0]) / cross
        hit = (np.abs(cross) > tol) & (t > tol) & (t < 1 - tol) & (u > tol) & (u < 1 - tol)
        idx = np.arange(m)
        adjacent = (np.abs(idx[:, None] - idx[None, :]) <= 1) | (np.abs(idx[:, None] - idx[None, :]) == m - 1)
        count += int(np.sum(hit & ~adjacent))
    return count // 2


def crossings_with_line(curve: PLCurve, B: SlopeCurve) -> int:
    total = 0
    for a, b in curve.edges():
        fa, fb = B.level(a), B.level(b)
        if fa.denominator == 1:
            raise NonGeneric(f"vertex {a} lies on {B}")
        lo, hi = min(fa, fb), max(fa, fb)
        total += math.floor(hi) - math.floor(lo)
    return total


# ---------------------- intersection bookkeeping ----------------------

@dataclass(frozen=True)
class IntersectionBook:
    points_q: tuple[str, ...]
    points_p: tuple[tuple[str, str], ...]
    actions: Mapping[str, float] = field(default_factory=dict)
    positions: Mapping[str, Fraction] = field(default_factory=dict)
    coordinates: Mapping[str, Point] = field(default_factory=dict)

    @property
    def x0_labels(self) -> list[str]:
        return sorted({a for a, _ in self.points_p}, key=_label_key)

    @property
    def x1_labels(self) -> list[str]:
        return sorted({b for _, b in self.points_p}, key=_label_key)

    def with_actions(self, actions: Mapping[str, float]) -> "IntersectionBook":
        return IntersectionBook(self.points_q, self.points_p, dict(actions), self.positions, self.coordinates)


def p_label(x0: str, x1: str) -> str:
    return f"p[{x0},{x1}]"


def _label_key(label: str) -> tuple[str, int]:
    head, _, tail = label.rpartition("_")
    return head, int(tail) if tail.isdigit() else -1


def intersection_book(L: SlopeCurve, A: SlopeCurve, B: SlopeCurve) -> IntersectionBook:
    for X, Y in ((L, A), (L, B), (A, B)):
        if parallel(X, Y):
            raise InvalidParameter(f"{X} and {Y} are parallel")
    ab = intersections(A, B)
    for pt in ab:
        if L.contains(pt):
            raise TriplePoint(f"{L}, {A} and {B} share the point {pt}")
    la, lb = intersections(A, L), intersections(L, B)
    coords: dict[str, Point] = {}
    positions: dict[str, Fraction] = {}
    for i, pt in enumerate(la):
        coords[f"x0_{i}"] = pt
        positions[f"x0_{i}"] = L.position(pt)
    for j, pt in enumerate(lb):
        coords[f"x1_{j}"] = pt
        positions[f"x1_{j}"] = L.position(pt)
    for k, pt in enumerate(ab):
        coords[f"q_{k}"] = pt
    points_q = tuple(f"q_{k}" for k in range(len(ab)))
    points_p = tuple((f"x0_{i}", f"x1_{j}") for i in range(len(la)) for j in range(len(lb)))
    return IntersectionBook(points_q, points_p, {}, positions, coords)


# ---------------------- counting ----------------------

@dataclass(frozen=True)
class Decomposition:
    n_q: int
    n_p: int
    n_pl: int
    width: Fraction


@dataclass(frozen=True)
class RankConsistency:
    lhs: int
    rhs_sum: int
    conn_rank: int


def count_decomposition(L: SlopeCurve, A: SlopeCurve, B: SlopeCurve, w=None, conv: int = 1) -> Decomposition:
    book = intersection_book(L, A, B)  # parallel and triple-point checks
    gap = crossing_gap(L, A, B)
    if w is not None:
        candidates = [Fraction(w)]
    else:
        # the B-independent width first, so the twisted curve can be reused across B
        shared = crossing_gap(L, A) / 10
        candidates = ([shared] if shared < gap / 4 else []) + [gap / k for k in range(10, 20)]
    last_error: NonGeneric | None = None
    for width in candidates:
        if not 0 < width < gap / 4:
            raise WidthTooLarge(f"width {width} must lie in (0; {gap / 4})")
        try:
            n_pl = crossings_with_line(_twisted_cached(L, A, width, conv), B)
        except NonGeneric as exc:
            last_error = exc
            logger.debug("width %s not generic: %s", width, exc)
            continue
        n_q = abs(det_pair(A, B))
        n_p = abs(det_pair(A, L)) * abs(det_pair(L, B))
        if len(book.points_q) != n_q or len(book.points_p) != n_p:
            raise ExactnessViolation("intersection book disagrees with determinant counts")
        return Decomposition(n_q, n_p, n_pl, width)
    raise last_error


@lru_cache(maxsize=1024)
def _twisted_cached(L: SlopeCurve, A: SlopeCurve, w: Fraction, conv: int) -> PLCurve:
    return twisted_pl_curve(L, A, w, conv)


def rank_consistency(L: SlopeCurve, A: SlopeCurve, B: SlopeCurve, conv: int = 1) -> RankConsistency:
    for X, Y in ((L, A), (L, B), (A, B)):
        if parallel(X, Y):
            raise InvalidParameter(f"{X} and {Y} are parallel")
    lhs = abs(det_pair(twist_slope(L, A, conv), B))
    rhs = abs(det_pair(A, B)) + abs(det_pair(A, L) * det_pair(L, B))
    diff = rhs - lhs
    if diff < 0 or diff % 2:
        raise ExactnessViolation(f"rank defect {diff} is not a nonnegative even integer")
    return RankConsistency(lhs, rhs, diff // 2)


def generic_triple(L: SlopeCurve, A: SlopeCurve, B: SlopeCurve, tries: int = 97) -> tuple[SlopeCurve, SlopeCurve, SlopeCurve]:
    """Move the offset of B through k/97 until L, A, B have no common point."""
    start = int(B.offset * 97) if (B.offset * 97).denominator == 1 else 0
    for k in range(tries):
        candidate = B.with_offset(Fraction((start + k) % 97, 97))
        if coincide(candidate, L) or coincide(candidate, A):
            continue
        if not any(L.contains(pt) for pt in intersections(A, candidate)):
            return L, A, candidate
    raise TriplePoint(f"no generic offset found for {L}, {A}, {B}")


# ---------------------- chain-level scenario ----------------------

def quantize_down(x: float) -> float:
    return math.floor(x * QUANTUM) / QUANTUM


def quantize(x: float) -> float:
    return round(x * QUANTUM) / QUANTUM


@dataclass(frozen=True)
class FloerScenario:
    triple: ExactTriple
    book: IntersectionBook
    cross_pairs: int
    higher_terms: bool


def slot_spacing(epsilon: float) -> float:
    return math.ceil(12 * epsilon * QUANTUM) / QUANTUM


def assign_actions(book: IntersectionBook, epsilon: float, rng: random.Random, kappa: float = 0.0,
                   p_offsets: Mapping[tuple[str, str], float] | None = None,
                   low_q: int = 0) -> IntersectionBook:
    """Synthetic actions meeting the action-gap conditions.

    a(x1_j) = j G, a(x0_i) = i d1 G (so the sums are distinct multiples of G),
    a(x~0) = a(x0) + kappa, and each q-point sits in the middle of a gap between
    multiples of G, jittered by at most epsilon/2. The first `low_q` q-points go
    below every p-point.
    """
    if epsilon < 4 / QUANTUM:
        raise ConditionsUnsatisfiable("II", f"epsilon {epsilon} below the 1/{QUANTUM} grade quantum")
    if not -epsilon < kappa <= 0:
        raise ConditionsUnsatisfiable("V", f"2 pi R(0) = {kappa} outside (-{epsilon}; 0]")
    G = slot_spacing(epsilon)
    x0s, x1s = book.x0_labels, book.x1_labels
    d1 = len(x1s)
    actions: dict[str, float] = {}
    for j, lab in enumerate(x1s):
        actions[lab] = j * G
    for i, lab in enumerate(x0s):
        actions[lab] = i * d1 * G + kappa
    for x0, x1 in book.points_p:
        eta = (p_offsets or {}).get((x0, x1), 0.0)
        if not 0 <= eta < epsilon:
            raise ConditionsUnsatisfiable("V", f"p-point offset {eta} outside [0; {epsilon})")
        actions[p_label(x0, x1)] = actions[x0] + actions[x1] + eta

    n_q, n_pairs = len(book.points_q), len(book.points_p)
    low_slots = list(range(-n_q, 0))
    high_slots = list(range(0, n_pairs + n_q))
    if low_q > len(low_slots):
        raise ConditionsUnsatisfiable("II", f"cannot place {low_q} q-points below the p-points")
    chosen = rng.sample(low_slots, low_q)
    rest = [s for s in low_slots + high_slots if s not in chosen]
    slots = chosen + rng.sample(rest, n_q - low_q)
    centre = quantize(6 * epsilon)
    half = math.floor(epsilon / 2 * QUANTUM)
    for lab, slot in zip(book.points_q, slots):
        jitter = rng.randint(-half, half) / QUANTUM
        actions[lab] = slot * G + centre + jitter
    return book.with_actions(actions)


def floer_scenario(L: SlopeCurve, A: SlopeCurve, B: SlopeCurve, epsilon: float, seed: int = 0, *,
                   kappa: float = 0.0, p_offsets: Mapping[tuple[str, str], float] | None = None,
                   cross_pairs: int | None = None, differential_density: float = 0.0,
                   perturbation_density: float = 0.0, conv: int = 1) -> FloerScenario:
    rng = random.Random(seed)
    book = intersection_book(L, A, B)
    if cross_pairs is None:
        cross_pairs = rank_consistency(L, A, B, conv).conn_rank
    book = assign_actions(book, epsilon, rng, kappa, p_offsets, low_q=cross_pairs)
    a = book.actions

    # C' = CF(L, L1) (x) CF(tau L0, L), C = CF(tau L0, L1), C'' = CF(L0, L1)
    g_labels = [f"{x1}*{x0}" for x0, x1 in book.points_p]
    p_labels = [p_label(x0, x1) for x0, x1 in book.points_p]
    x_labels = [f"x_{lab.split('_')[1]}" for lab in book.points_q]
    Cp = GradedSpace(tuple(g_labels), tuple(a[x0] + a[x1] for x0, x1 in book.points_p))
    C = GradedSpace(tuple(p_labels) + book.points_q, tuple(a[p] for p in p_labels) + tuple(a[q] for q in book.points_q))
    Cpp = GradedSpace(tuple(x_labels), tuple(a[q] for q in book.points_q))

    beta = set(zip(p_labels, g_labels))
    gamma = set(zip(x_labels, book.points_q))
    d_p, d_c, d_pp = _base_differentials(rng, Cp, C, Cpp, g_labels, p_labels, list(book.points_q), x_labels,
                                         cross_pairs, differential_density)

    base = _assemble(Cp, C, Cpp, d_p, d_c, d_pp, beta, gamma, set(), epsilon, kappa)
    triple, higher = base, False
    if perturbation_density > 0:
        for attempt in range(MAX_DRAWS):
            candidate = _conjugate(base, rng, perturbation_density, epsilon)
            if candidate is not None and all_passed(verify_triple(candidate)):
                triple, higher = candidate, True
                break
            logger.debug("perturbation draw %d rejected", attempt)
        else:
            logger.warning("no admissible higher terms after %d draws; using zero higher terms", MAX_DRAWS)
    return FloerScenario(triple, book, cross_pairs, higher)


def build_floer_scenario(L: SlopeCurve, A: SlopeCurve, B: SlopeCurve, epsilon: float, seed: int = 0,
                         **kwargs) -> ExactTriple:
    return floer_scenario(L, A, B, epsilon, seed, **kwargs).triple


def _base_differentials(rng: random.Random, Cp: GradedSpace, C: GradedSpace, Cpp: GradedSpace,
                        g_labels: list[str], p_labels: list[str], q_labels: list[str], x_labels: list[str],
                        cross_pairs: int, density: float):
    """Differentials made of disjoint pairs: C' pairs mirrored on the p-points,
    C'' pairs mirrored on the q-points, and cross pairs q -> p in C."""
    d_p, d_c, d_pp = set(), set(), set()
    used_p: set[int] = set()
    used_q: set[int] = set()

    # cross pairs: each low q-point kills one p-point above it
    lows = sorted(range(len(q_labels)), key=lambda k: C.grade(q_labels[k]))[:cross_pairs]
    for k in lows:
        options = [i for i in range(len(p_labels))
                   if i not in used_p and C.grade(p_labels[i]) > C.grade(q_labels[k])]
        if not options:
            raise ConditionsUnsatisfiable("II", "no p-point above a q-point for a cross pair")
        i = rng.choice(options)
        used_p.add(i)
        used_q.add(k)
        d_c.add((p_labels[i], q_labels[k]))

    free_p = [i for i in range(len(p_labels)) if i not in used_p]
    rng.shuffle(free_p)
    for i, j in zip(free_p[::2], free_p[1::2]):
        if rng.random() >= density:
            continue
        lo, hi = sorted((i, j), key=lambda t: Cp.grade(g_labels[t]))
        d_p.add((g_labels[hi], g_labels[lo]))
        d_c.add((p_labels[hi], p_labels[lo]))

    free_q = [k for k in range(len(q_labels)) if k not in used_q]
    rng.shuffle(free_q)
    for k, l in zip(free_q[::2], free_q[1::2]):
        if rng.random() >= density:
            continue
        lo, hi = sorted((k, l), key=lambda t: Cpp.grade(x_labels[t]))
        d_pp.add((x_labels[hi], x_labels[lo]))
        d_c.add((q_labels[hi], q_labels[lo]))
    return d_p, d_c, d_pp


def _assemble(Cp, C, Cpp, d_p, d_c, d_pp, b, c, h, epsilon, kappa) -> ExactTriple:
    positive = OrderInterval.positive()
    nonneg = OrderInterval.at_least(0.0)
    return ExactTriple(
        Cp=DifferentialSpace(Cp, OrderMap(Cp, Cp, frozenset(d_p), positive)),
        C=DifferentialSpace(C, OrderMap(C, C, frozenset(d_c), positive)),
        Cpp=DifferentialSpace(Cpp, OrderMap(Cpp, Cpp, frozenset(d_pp), positive)),
        b=OrderMap(Cp, C, frozenset(b), nonneg),
        c=OrderMap(C, Cpp, frozenset(c), nonneg),
        h=OrderMap(Cp, Cpp, frozenset(h), positive),
        epsilon=epsilon,
        kappa_total=kappa,
    )


def _conjugate(t: ExactTriple, rng: random.Random, density: float, epsilon: float) -> ExactTriple | None:
    """Replace d_D by Phi d_D Phi^-1 with Phi = I + N, N block lower triangular
    and raising grades by at least 3 epsilon. Low-order parts of b and c are kept."""
    D = total_complex(t)
    grades = np.array(D.space.grades)
    tags = np.array([lab.split("/", 1)[0] for lab in D.space.basis])
    rank = {"Cp": 0, "C": 1, "Cpp": 2}
    block = np.array([rank[tg] for tg in tags])
    n = D.space.dim
    eligible = (grades[:, None] - grades[None, :] >= 3 * epsilon) & (block[:, None] >= block[None, :])
    draws = np.array([[rng.random() < density for _ in range(n)] for _ in range(n)], dtype=bool) if n else np.zeros((0, 0), bool)
    N = (eligible & draws).astype(np.int64)
    if not N.any():
        return None
    # N is strictly grade raising, hence nilpotent: Phi^-1 = sum N^k
    inv = np.eye(n, dtype=np.int64)
    power = np.eye(n, dtype=np.int64)
    for _ in range(n):
        power = (power @ N) % 2
        if not power.any():
            break
        inv = (inv + power) % 2
    phi = (np.eye(n, dtype=np.int64) + N) % 2
    d = (phi @ D.d.to_array().astype(np.int64) @ inv) % 2

    def block_entries(dst: str, src: str) -> set[tuple[str, str]]:
        rows = np.nonzero(tags == dst)[0]
        cols = np.nonzero(tags == src)[0]
        return {(D.space.basis[r].split("/", 1)[1], D.space.basis[c].split("/", 1)[1])
                for r in rows for c in cols if d[r, c]}

    upper = any(d[r, c] for r in range(n) for c in range(n) if block[r] < block[c])
    if upper:
        return None
    return _assemble(t.Cp.space, t.C.space, t.Cpp.space,
                     block_entries("Cp", "Cp"), block_entries("C", "C"), block_entries("Cpp", "Cpp"),
                     block_entries("C", "Cp"), block_entries("Cpp", "C"), block_entries("Cpp", "Cp"),
                     epsilon, t.kappa_total)
