"""Real-graded differential vector spaces over GF(2).

A graded space carries one real grade (an action value) per basis element.
Maps are sparse sets of (dst_label, src_label) entries and carry a declared
order interval: every entry shifts the grade by an element of it.

The connecting map of the long exact sequence is oriented H(C'') -> H(C'),
following the lower-triangular total complex

    d_D = [[d_C',  0,    0    ],
           [b,     d_C,  0    ],
           [h,     c,    d_C'']]

on D = C' + C + C''. A cocycle z of C'' gives the cocycle (0, 0, z) of D;
when D is acyclic it bounds some (a', a, a''), and z maps to the class of a'.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

from errors import ExactnessViolation, InputError, InvalidParameter, NotADifferential, OrderViolation, SpectralCollapseViolation
from gf2 import gf2_matmul, gf2_nullspace_basis, gf2_rank, gf2_solve, gf2_span_rank_modulo, to_gf2

logger = logging.getLogger(__name__)

INF = math.inf


# ---------------------- intervals ----------------------

@dataclass(frozen=True)
class OrderInterval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = False

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise InvalidParameter("interval endpoints must not be NaN")
        if self.lo > self.hi:
            raise InvalidParameter(f"interval with lo={self.lo} > hi={self.hi}")
        # infinite endpoints are always open
        if math.isinf(self.lo):
            object.__setattr__(self, "lo_closed", False)
        if math.isinf(self.hi):
            object.__setattr__(self, "hi_closed", False)

    @classmethod
    def closed_open(cls, lo: float, hi: float) -> "OrderInterval":
        return cls(lo, hi, True, False)

    @classmethod
    def open_open(cls, lo: float, hi: float) -> "OrderInterval":
        return cls(lo, hi, False, False)

    @classmethod
    def closed(cls, lo: float, hi: float) -> "OrderInterval":
        return cls(lo, hi, True, True)

    @classmethod
    def point(cls, r: float) -> "OrderInterval":
        return cls(r, r, True, True)

    @classmethod
    def at_least(cls, lo: float) -> "OrderInterval":
        return cls(lo, INF, True, False)

    @classmethod
    def positive(cls) -> "OrderInterval":
        return cls(0.0, INF, False, False)

    @classmethod
    def everything(cls) -> "OrderInterval":
        return cls(-INF, INF, False, False)

    @property
    def is_empty(self) -> bool:
        return self.lo == self.hi and not (self.lo_closed and self.hi_closed)

    def contains(self, x: float) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True

    def subset_of(self, other: "OrderInterval") -> bool:
        if self.is_empty:
            return True
        if self.lo < other.lo or (self.lo == other.lo and self.lo_closed and not other.lo_closed):
            return False
        if self.hi > other.hi or (self.hi == other.hi and self.hi_closed and not other.hi_closed):
            return False
        return True

    def intersect(self, other: "OrderInterval") -> "OrderInterval":
        if self.lo > other.lo:
            lo, lo_closed = self.lo, self.lo_closed
        elif other.lo > self.lo:
            lo, lo_closed = other.lo, other.lo_closed
        else:
            lo, lo_closed = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hi_closed = self.hi, self.hi_closed
        elif other.hi < self.hi:
            hi, hi_closed = other.hi, other.hi_closed
        else:
            hi, hi_closed = self.hi, self.hi_closed and other.hi_closed
        if lo > hi:
            return OrderInterval(lo, lo, False, False)
        return OrderInterval(lo, hi, lo_closed, hi_closed)

    def hull(self, other: "OrderInterval") -> "OrderInterval":
        if self.is_empty:
            return other
        if other.is_empty:
            return self
        if self.lo < other.lo:
            lo, lo_closed = self.lo, self.lo_closed
        elif other.lo < self.lo:
            lo, lo_closed = other.lo, other.lo_closed
        else:
            lo, lo_closed = self.lo, self.lo_closed or other.lo_closed
        if self.hi > other.hi:
            hi, hi_closed = self.hi, self.hi_closed
        elif other.hi > self.hi:
            hi, hi_closed = other.hi, other.hi_closed
        else:
            hi, hi_closed = self.hi, self.hi_closed or other.hi_closed
        return OrderInterval(lo, hi, lo_closed, hi_closed)

    def __add__(self, other: "OrderInterval") -> "OrderInterval":
        """Minkowski sum: the order of a composite is the sum of the orders."""
        if self.is_empty or other.is_empty:
            return OrderInterval(0.0, 0.0, False, False)
        return OrderInterval(self.lo + other.lo, self.hi + other.hi,
                             self.lo_closed and other.lo_closed,
                             self.hi_closed and other.hi_closed)

    def __str__(self) -> str:
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{_fmt_end(self.lo)};{_fmt_end(self.hi)}{right}"


def _fmt_end(x: float) -> str:
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    return f"{x:g}"


# ---------------------- graded spaces ----------------------

@dataclass(frozen=True)
class GradedSpace:
    basis: tuple[str, ...]
    grades: tuple[float, ...]
    _index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "basis", tuple(str(b) for b in self.basis))
        object.__setattr__(self, "grades", tuple(float(g) for g in self.grades))
        if len(self.basis) != len(self.grades):
            raise InputError("basis and grades differ in length")
        if len(set(self.basis)) != len(self.basis):
            raise InputError("basis labels must be distinct")
        for g in self.grades:
            if not math.isfinite(g):
                raise InputError(f"grade {g!r} is not a finite real")
        object.__setattr__(self, "_index", {b: i for i, b in enumerate(self.basis)})

    @classmethod
    def from_grades(cls, grades: Mapping[str, float] | Iterable[tuple[str, float]]) -> "GradedSpace":
        items = list(grades.items()) if isinstance(grades, Mapping) else list(grades)
        return cls(tuple(k for k, _ in items), tuple(v for _, v in items))

    @classmethod
    def empty(cls) -> "GradedSpace":
        return cls((), ())

    @property
    def dim(self) -> int:
        return len(self.basis)

    def grade(self, label: str) -> float:
        return self.grades[self._index[label]]

    def index(self, label: str) -> int:
        return self._index[label]

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def support(self) -> frozenset[float]:
        return frozenset(self.grades)


def direct_sum(parts: Sequence[tuple[str, GradedSpace]]) -> GradedSpace:
    """Direct sum with basis labels prefixed by `tag/`."""
    basis, grades = [], []
    for tag, space in parts:
        basis.extend(f"{tag}/{b}" for b in space.basis)
        grades.extend(space.grades)
    return GradedSpace(tuple(basis), tuple(grades))


# ---------------------- maps ----------------------

@dataclass(frozen=True)
class OrderMap:
    src: GradedSpace
    dst: GradedSpace
    entries: frozenset
    declared_order: OrderInterval = field(default_factory=OrderInterval.everything)

    def __post_init__(self):
        object.__setattr__(self, "entries", frozenset((str(i), str(j)) for i, j in self.entries))
        for i, j in self.entries:
            if i not in self.dst or j not in self.src:
                raise InputError(f"entry ({i}, {j}) refers to an unknown label")
            shift = self.dst.grade(i) - self.src.grade(j)
            if not self.declared_order.contains(shift):
                raise OrderViolation(
                    f"entry ({i} <- {j}) shifts by {shift:g}, outside declared order {self.declared_order}")

    @classmethod
    def zero(cls, src: GradedSpace, dst: GradedSpace,
             order: OrderInterval | None = None) -> "OrderMap":
        return cls(src, dst, frozenset(), order or OrderInterval.everything())

    @classmethod
    def from_array(cls, src: GradedSpace, dst: GradedSpace, matrix,
                   order: OrderInterval | None = None) -> "OrderMap":
        mat = to_gf2(matrix).reshape(dst.dim, src.dim)
        rows, cols = np.nonzero(mat)
        entries = frozenset((dst.basis[r], src.basis[c]) for r, c in zip(rows.tolist(), cols.tolist()))
        return cls(src, dst, entries, order or OrderInterval.everything())

    def to_array(self) -> np.ndarray:
        mat = np.zeros((self.dst.dim, self.src.dim), dtype=np.uint8)
        for i, j in self.entries:
            mat[self.dst.index(i), self.src.index(j)] = 1
        return mat

    def shift(self, entry: tuple[str, str]) -> float:
        i, j = entry
        return self.dst.grade(i) - self.src.grade(j)

    def shifts(self) -> list[float]:
        return sorted(self.shift(e) for e in self.entries)

    def is_zero(self) -> bool:
        return not self.entries

    def with_order(self, order: OrderInterval) -> "OrderMap":
        return OrderMap(self.src, self.dst, self.entries, order)

    def tight_order(self) -> OrderInterval:
        """Smallest closed interval containing every shift (empty-safe)."""
        shifts = self.shifts()
        if not shifts:
            return OrderInterval.point(0.0)
        return OrderInterval.closed(shifts[0], shifts[-1])


def compose(g: OrderMap, f: OrderMap) -> OrderMap:
    """g o f over GF(2); the declared order is the sum of the declared orders."""
    if f.dst != g.src:
        raise InputError("cannot compose: target of f is not the source of g")
    mat = gf2_matmul(g.to_array(), f.to_array())
    return OrderMap.from_array(f.src, g.dst, mat, f.declared_order + g.declared_order)


def add(f: OrderMap, g: OrderMap) -> OrderMap:
    if f.src != g.src or f.dst != g.dst:
        raise InputError("cannot add maps between different spaces")
    return OrderMap(f.src, f.dst, f.entries ^ g.entries, f.declared_order.hull(g.declared_order))


# ---------------------- differential spaces ----------------------

NONNEGATIVE = OrderInterval.at_least(0.0)


@dataclass(frozen=True)
class DifferentialSpace:
    """A filtered complex. `bound` is (0;inf) except for total complexes,
    whose b and c blocks may keep the filtration level."""

    space: GradedSpace
    d: OrderMap
    bound: OrderInterval = field(default_factory=OrderInterval.positive)

    def __post_init__(self):
        if self.d.src != self.space or self.d.dst != self.space:
            raise InputError("differential must map the space to itself")
        if not self.bound.subset_of(NONNEGATIVE):
            raise OrderViolation(f"differential bound {self.bound} is not within [0;inf)")
        if not self.d.declared_order.subset_of(self.bound):
            raise OrderViolation(f"differential declared of order {self.d.declared_order}, expected within {self.bound}")
        mat = self.d.to_array()
        if mat.size and gf2_matmul(mat, mat).any():
            raise NotADifferential("d o d != 0 over GF(2)")

    @classmethod
    def trivial(cls, space: GradedSpace) -> "DifferentialSpace":
        return cls(space, OrderMap.zero(space, space, OrderInterval.positive()))


class Verdict(str, Enum):
    VANISHES = "Vanishes"
    INCONCLUSIVE = "Inconclusive"
    HYPOTHESIS_FAILED = "HypothesisFailed"


@dataclass(frozen=True)
class ExactTriple:
    Cp: DifferentialSpace
    C: DifferentialSpace
    Cpp: DifferentialSpace
    b: OrderMap
    c: OrderMap
    h: OrderMap
    epsilon: float
    kappa_total: float = 0.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidParameter(f"epsilon must be > 0, got {self.epsilon}")
        if self.b.src != self.Cp.space or self.b.dst != self.C.space:
            raise InputError("b must map C' to C")
        if self.c.src != self.C.space or self.c.dst != self.Cpp.space:
            raise InputError("c must map C to C''")
        if self.h.src != self.Cp.space or self.h.dst != self.Cpp.space:
            raise InputError("h must map C' to C''")


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class LongExactRanks:
    hP: int
    hC: int
    hPP: int
    rank_b: int
    rank_c: int
    rank_conn: int


def all_passed(checks: Iterable[Check]) -> bool:
    return all(c.passed for c in checks)


# ---------------------- operations ----------------------

def has_gap(space: GradedSpace, I: OrderInterval) -> bool:
    return gap_violation(space, I) is None


def gap_violation(space: GradedSpace, I: OrderInterval) -> tuple[float, float] | None:
    """A pair (r, s) of support values with r - s in I, or None."""
    supp = sorted(space.support())
    for r, s in product(supp, repeat=2):
        if I.contains(r - s):
            return r, s
    return None


def gap_witness(space: GradedSpace, eps: float) -> list[tuple[float, ...]] | None:
    """Blocks R_1 < ... < R_m of the support, each of diameter < eps and
    consecutive blocks at least 2*eps apart; None if the gap [eps;2eps) fails."""
    if not has_gap(space, OrderInterval.closed_open(eps, 2 * eps)):
        return None
    blocks: list[list[float]] = []
    for r in sorted(space.support()):
        if blocks and r - blocks[-1][0] < eps:
            blocks[-1].append(r)
        else:
            blocks.append([r])
    return [tuple(b) for b in blocks]


def check_order(f: OrderMap, I: OrderInterval) -> bool:
    return all(I.contains(f.shift(e)) for e in f.entries)


def cohomology_rank(D: DifferentialSpace) -> int:
    return D.space.dim - 2 * gf2_rank(D.d.to_array())


def cohomology_basis(D: DifferentialSpace) -> np.ndarray:
    """Cocycles (as columns) whose classes form a basis of H(D)."""
    dm = D.d.to_array()
    n = D.space.dim
    reps = np.zeros((n, 0), dtype=np.uint8)
    cocycles = gf2_nullspace_basis(dm) if n else np.zeros((0, 0), dtype=np.uint8)
    for z in cocycles:
        candidate = np.concatenate([reps, z.reshape(-1, 1)], axis=1)
        if gf2_span_rank_modulo(dm, candidate) > reps.shape[1]:
            reps = candidate
    return reps


def brute_force_cohomology_rank(D: DifferentialSpace) -> int:
    """dim ker - dim im by enumerating every vector; only for dim <= 16."""
    n = D.space.dim
    if n > 16:
        raise InvalidParameter("brute force enumeration limited to 16 basis elements")
    if n == 0:
        return 0
    mat = D.d.to_array().astype(np.int64)
    vectors = np.array(list(product((0, 1), repeat=n)), dtype=np.int64)
    images = (vectors @ mat.T) % 2
    kernel = int(np.sum(~images.any(axis=1)))
    image = len({row.tobytes() for row in images.astype(np.uint8)})
    return int(round(math.log2(kernel))) - int(round(math.log2(image)))


def split_at(f: OrderMap, theta: float) -> tuple[OrderMap, OrderMap]:
    low = frozenset(e for e in f.entries if f.shift(e) < theta)
    high = f.entries - low
    below = OrderInterval(-INF, theta, False, False) if theta > -INF else OrderInterval(-INF, -INF, False, False)
    above = OrderInterval.at_least(theta) if theta > -INF else OrderInterval.everything()
    low_order = f.declared_order.intersect(below)
    high_order = f.declared_order.intersect(above)
    return OrderMap(f.src, f.dst, low, low_order), OrderMap(f.src, f.dst, high, high_order)


def spectral_vanishing(D: DifferentialSpace, epsilon: float) -> Verdict:
    if not epsilon > 0:
        raise InvalidParameter(f"epsilon must be > 0, got {epsilon}")
    if not has_gap(D.space, OrderInterval.closed_open(epsilon, 2 * epsilon)):
        return Verdict.HYPOTHESIS_FAILED
    delta, _ = split_at(D.d, epsilon)
    dm = delta.to_array()
    if dm.size and gf2_matmul(dm, dm).any():
        return Verdict.HYPOTHESIS_FAILED
    h_delta = D.space.dim - 2 * gf2_rank(dm)
    if h_delta != 0:
        return Verdict.INCONCLUSIVE
    full = cohomology_rank(D)
    if full != 0:
        raise SpectralCollapseViolation(f"H(D, delta) = 0 but H(D, d) has rank {full}")
    return Verdict.VANISHES


def verify_triple(t: ExactTriple) -> list[Check]:
    eps = t.epsilon
    checks: list[Check] = []

    def gap_check(name: str, space: GradedSpace, I: OrderInterval) -> None:
        bad = gap_violation(space, I)
        detail = "" if bad is None else f"grades {bad[0]:g}, {bad[1]:g} differ by {bad[0] - bad[1]:g}"
        checks.append(Check(name, bad is None, detail))

    gap_check("gap C' (0;3e)", t.Cp.space, OrderInterval.open_open(0, 3 * eps))
    gap_check("gap C'' (0;3e)", t.Cpp.space, OrderInterval.open_open(0, 3 * eps))
    gap_check("gap C (0;2e)", t.C.space, OrderInterval.open_open(0, 2 * eps))

    close = [(r, s) for r in t.Cp.space.support() for s in t.Cpp.space.support() if abs(r - s) < 4 * eps]
    checks.append(Check("separation C'/C'' >= 4e", not close,
                        "" if not close else f"|{close[0][0]:g} - {close[0][1]:g}| < {4 * eps:g}"))

    low_order = OrderInterval.closed_open(0, eps)
    high_order = OrderInterval.at_least(2 * eps)
    beta, b_rest = split_at(t.b, eps)
    gamma, c_rest = split_at(t.c, eps)
    for name, low, rest in (("b", beta, b_rest), ("c", gamma, c_rest)):
        ok = check_order(low, low_order) and check_order(rest, high_order)
        detail = "" if ok else f"shifts {low.shifts() + rest.shifts()} do not split into [0;e) + [2e;inf)"
        checks.append(Check(f"split {name}", ok, detail))

    bm, gm = beta.to_array(), gamma.to_array()
    rank_beta, rank_gamma = gf2_rank(bm), gf2_rank(gm)
    checks.append(Check("beta injective", rank_beta == t.Cp.space.dim, f"rank {rank_beta} vs dim C' {t.Cp.space.dim}"))
    checks.append(Check("gamma surjective", rank_gamma == t.Cpp.space.dim, f"rank {rank_gamma} vs dim C'' {t.Cpp.space.dim}"))
    checks.append(Check("rank beta + rank gamma = dim C", rank_beta + rank_gamma == t.C.space.dim,
                        f"{rank_beta} + {rank_gamma} vs {t.C.space.dim}"))
    gb = gf2_matmul(gm, bm) if bm.size and gm.size else np.zeros((t.Cpp.space.dim, t.Cp.space.dim), dtype=np.uint8)
    checks.append(Check("gamma beta = 0", not gb.any()))

    checks.append(Check("h order [0;inf)", check_order(t.h, NONNEGATIVE), f"shifts {t.h.shifts()[:3]}"))
    positive = OrderInterval.positive()
    for name, D in (("C'", t.Cp), ("C", t.C), ("C''", t.Cpp)):
        checks.append(Check(f"d_{name} order (0;inf)", check_order(D.d, positive)))

    dp, dc, dpp = t.Cp.d.to_array(), t.C.d.to_array(), t.Cpp.d.to_array()
    b, c, h = t.b.to_array(), t.c.to_array(), t.h.to_array()
    checks.append(Check("chain map b", _gf2_equal(_mm(dc, b), _mm(b, dp))))
    checks.append(Check("chain map c", _gf2_equal(_mm(dpp, c), _mm(c, dc))))
    checks.append(Check("homotopy c b = d h + h d", _gf2_equal(_mm(c, b), _mm(dpp, h) ^ _mm(h, dp))))
    checks.append(Check("derived: h order [4e;inf)", check_order(t.h, OrderInterval.at_least(4 * eps))))
    failed = [c.name for c in checks if not c.passed]
    if failed:
        logger.debug("verify_triple failures: %s", ", ".join(failed))
    return checks


def _mm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] == 0 or b.shape[0] == 0:
        return np.zeros((a.shape[0], b.shape[1]), dtype=np.uint8)
    return gf2_matmul(a, b)


def _gf2_equal(a: np.ndarray, b: np.ndarray) -> bool:
    return a.shape == b.shape and not (a ^ b).any()


def total_complex(t: ExactTriple) -> DifferentialSpace:
    space = direct_sum([("Cp", t.Cp.space), ("C", t.C.space), ("Cpp", t.Cpp.space)])
    entries = set()
    blocks = (
        ("Cp", "Cp", t.Cp.d), ("C", "C", t.C.d), ("Cpp", "Cpp", t.Cpp.d),
        ("C", "Cp", t.b), ("Cpp", "C", t.c), ("Cpp", "Cp", t.h),
    )
    for dst_tag, src_tag, f in blocks:
        entries.update((f"{dst_tag}/{i}", f"{src_tag}/{j}") for i, j in f.entries)
    try:
        d = OrderMap(space, space, frozenset(entries), NONNEGATIVE)
        return DifferentialSpace(space, d, bound=NONNEGATIVE)
    except (NotADifferential, OrderViolation) as exc:
        raise ExactnessViolation(f"total complex rejected: {exc}") from exc


def long_exact_ranks(t: ExactTriple) -> LongExactRanks:
    hP, hC, hPP = cohomology_rank(t.Cp), cohomology_rank(t.C), cohomology_rank(t.Cpp)
    dp, dc, dpp = t.Cp.d.to_array(), t.C.d.to_array(), t.Cpp.d.to_array()

    zp = cohomology_basis(t.Cp)
    zc = cohomology_basis(t.C)
    zpp = cohomology_basis(t.Cpp)
    rank_b = gf2_span_rank_modulo(dc, _mm(t.b.to_array(), zp))
    rank_c = gf2_span_rank_modulo(dpp, _mm(t.c.to_array(), zc))

    # zig-zag through the total complex
    D = total_complex(t)
    dD = D.d.to_array()
    n_p, n_c = t.Cp.space.dim, t.C.space.dim
    lifts = []
    for k in range(zpp.shape[1]):
        rhs = np.zeros(D.space.dim, dtype=np.uint8)
        rhs[n_p + n_c:] = zpp[:, k]
        x = gf2_solve(dD, rhs)
        if x is None:
            raise ExactnessViolation("total complex is not acyclic: a cocycle of C'' does not bound")
        lifts.append(x[:n_p])
    lifted = np.array(lifts, dtype=np.uint8).T if lifts else np.zeros((n_p, 0), dtype=np.uint8)
    conn_zigzag = gf2_span_rank_modulo(dp, lifted)

    conn_identity = hP - rank_b
    ranks = LongExactRanks(hP, hC, hPP, rank_b, rank_c, conn_zigzag)
    problems = []
    if conn_zigzag != conn_identity:
        problems.append(f"connecting rank {conn_zigzag} (zig-zag) != {conn_identity} (hP - rank_b)")
    if hC != rank_b + rank_c:
        problems.append(f"hC={hC} != rank_b + rank_c = {rank_b + rank_c}")
    if hPP != rank_c + conn_zigzag:
        problems.append(f"hPP={hPP} != rank_c + rank_conn = {rank_c + conn_zigzag}")
    if problems:
        raise ExactnessViolation("; ".join(problems))
    return ranks
