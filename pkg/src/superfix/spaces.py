"""Super-metric spaces over finite sets, sampled intervals and function grids.

A space couples a point domain, a symmetric distance and the relaxation
coefficient ``s``.  Axioms are checked exhaustively over finite samples; the
relaxed (limsup) triangle condition is checked per witness family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Callable, Iterable, Sequence

import numpy as np

Point = Any
Distance = Callable[[Point, Point], float]


class DomainError(ValueError):
    """A point (or a map's output) lies outside the space's domain."""


class NumericError(ArithmeticError):
    """A computation produced NaN or an infinity where a finite value is required."""


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteDomain:
    points: tuple

    def contains(self, x: Point) -> bool:
        return any(same_point(x, p) for p in self.points)

    def sample(self) -> list:
        return list(self.points)

    def describe(self) -> dict:
        return {"type": "finite", "points": list(self.points)}


@dataclass(frozen=True)
class IntervalDomain:
    """Closed interval ``[lo, hi]`` sampled on a uniform grid of step ``step``.

    ``breakpoints`` are locations where a piecewise distance switches branch.
    Sampling adds one-sided probes ``b +/- step * 10**-j`` next to each of them so
    that extrema approached at a discontinuity are not missed by the grid.
    """

    lo: float
    hi: float
    step: float
    breakpoints: tuple = ()
    probe_depth: int = 4

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("interval needs hi > lo")
        if not self.step > 0:
            raise ValueError("grid step must be positive")

    @property
    def n_points(self) -> int:
        return int(round((self.hi - self.lo) / self.step)) + 1

    def contains(self, x: Point) -> bool:
        try:
            xf = float(x)
        except (TypeError, ValueError):
            return False
        return self.lo <= xf <= self.hi

    def grid(self) -> list[float]:
        n = self.n_points
        # rounding keeps decimal grids such as 0.95 bit-identical to literals
        pts = [round(self.lo + i * self.step, 12) for i in range(n - 1)]
        return pts + [float(self.hi)]

    def probes(self) -> list[float]:
        out = []
        for b in self.breakpoints:
            for j in range(1, self.probe_depth + 1):
                eps = self.step * 10.0 ** (-j)
                for q in (b - eps, b + eps):
                    if self.lo <= q <= self.hi:
                        out.append(q)
        return out

    def sample(self) -> list[float]:
        pts = self.grid()
        seen = set(pts)
        for q in self.probes():
            if q not in seen:
                seen.add(q)
                pts.append(q)
        return sorted(pts)

    def describe(self) -> dict:
        return {
            "type": "interval",
            "lo": self.lo,
            "hi": self.hi,
            "step": self.step,
            "breakpoints": list(self.breakpoints),
            "probe_depth": self.probe_depth,
        }


@dataclass(frozen=True)
class FunctionGridDomain:
    """Real functions sampled on a fixed abscissa grid; points are 1-D arrays."""

    grid: tuple

    def contains(self, x: Point) -> bool:
        arr = np.asarray(x)
        return arr.shape == (len(self.grid),) and bool(np.all(np.isfinite(arr)))

    def sample(self) -> list:
        raise ValueError("function-grid domains have no canonical finite sample")

    def describe(self) -> dict:
        return {"type": "function-grid", "grid": list(self.grid)}


def same_point(x: Point, y: Point) -> bool:
    """Exact point equality (element-wise for arrays)."""
    if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
        return bool(np.array_equal(np.asarray(x), np.asarray(y)))
    return x == y


# ---------------------------------------------------------------------------
# Space
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SuperMetricSpace:
    domain: FiniteDomain | IntervalDomain | FunctionGridDomain
    dist: Distance
    coeff_s: float = 1.0
    name: str = "space"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.coeff_s >= 1.0:
            raise ValueError(f"coeff_s must be >= 1, got {self.coeff_s}")

    def contains(self, x: Point) -> bool:
        return self.domain.contains(x)

    def sample(self) -> list:
        return self.domain.sample()

    def same(self, x: Point, y: Point) -> bool:
        return same_point(x, y)

    def describe(self) -> dict:
        return {"name": self.name, "coeff_s": self.coeff_s, "domain": self.domain.describe(), **self.params}


def distance(space: SuperMetricSpace, x: Point, y: Point) -> float:
    if not space.contains(x):
        raise DomainError(f"{x!r} is not in the domain of {space.name}")
    if not space.contains(y):
        raise DomainError(f"{y!r} is not in the domain of {space.name}")
    d = float(space.dist(x, y))
    if math.isnan(d):
        raise NumericError(f"distance({x!r}, {y!r}) is NaN")
    return d


# ---------------------------------------------------------------------------
# Concrete distances and constructors
# ---------------------------------------------------------------------------


def euclidean(x: float, y: float) -> float:
    return abs(x - y)


def intro_supermetric(x: float, y: float) -> float:
    """Piecewise super-metric on [0, inf): ``(x+y)/(1+x+y)`` off the zero axis."""
    if x == y:
        return 0.0
    if x != 0 and y != 0:
        # sum first so the result is bit-symmetric
        total = x + y
        return total / (1 + total)
    return max(x / 2, y / 2)


def unit_interval_supermetric(x: float, y: float) -> float:
    """Product distance on (0,1) with special rows for the endpoints 0 and 1."""
    if x == y:
        return 0.0
    if x == 1 or y == 1:
        other = y if x == 1 else x
        return 1 - other / 2
    if x == 0 or y == 0:
        return y if x == 0 else x
    return x * y


def max_power_distance(p: float) -> Distance:
    """``max_i |f_i - g_i| ** p`` on sampled functions."""
    if p < 1:
        raise ValueError("exponent p must be >= 1")

    def dist(f, g) -> float:
        diff = np.abs(np.asarray(f, dtype=float) - np.asarray(g, dtype=float))
        return float(np.max(diff) ** p) if diff.size else 0.0

    return dist


def finite_space(labels: Sequence, table, coeff_s: float = 1.0, name: str = "finite") -> SuperMetricSpace:
    """Finite space from an explicit distance table; asymmetric tables are rejected."""
    arr = np.asarray(table, dtype=float)
    n = len(labels)
    if arr.shape != (n, n):
        raise ValueError(f"distance table must be {n}x{n}, got {arr.shape}")
    if not np.array_equal(arr, arr.T):
        i, j = np.argwhere(arr != arr.T)[0]
        raise ValueError(f"distance table is not symmetric at ({labels[i]!r}, {labels[j]!r})")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValueError("distance table entries must be finite and nonnegative")
    if len(set(labels)) != n:
        raise ValueError("point labels must be distinct")
    index = {lab: k for k, lab in enumerate(labels)}
    rows = arr.tolist()

    def dist(x, y):
        return rows[index[x]][index[y]]

    return SuperMetricSpace(FiniteDomain(tuple(labels)), dist, coeff_s, name)


def function_space(grid: Sequence[float], p: float) -> SuperMetricSpace:
    """Sampled-function space with ``max|f-g|^p``, a super-metric with ``s = 2**(p-1)``."""
    return SuperMetricSpace(
        FunctionGridDomain(tuple(float(g) for g in grid)),
        max_power_distance(p),
        coeff_s=2.0 ** (p - 1),
        name=f"function-grid(p={p})",
        params={"p": p},
    )


# ---------------------------------------------------------------------------
# Axiom checks
# ---------------------------------------------------------------------------


@dataclass
class AxiomReport:
    identity_ok: bool = True
    symmetry_ok: bool = True
    # None means the triangle condition was not examined
    triangle_ok: bool | None = None
    witness_admissible: bool | None = None
    witnesses: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.identity_ok and self.symmetry_ok and self.triangle_ok is not False


def verify_point_axioms(space: SuperMetricSpace, sample: Iterable[Point]) -> AxiomReport:
    """Exhaustively check ``d >= 0``, ``d(x,y)=0 iff x=y`` and symmetry over ``sample``."""
    pts = list(sample)
    if not pts:
        raise ValueError("sample must be nonempty")
    for x in pts:
        if not space.contains(x):
            raise DomainError(f"{x!r} is not in the domain of {space.name}")
    report = AxiomReport()
    for i, x in enumerate(pts):
        for j, y in enumerate(pts):
            dxy = float(space.dist(x, y))
            equal = same_point(x, y)
            if dxy < 0 or (dxy == 0) != equal:
                report.identity_ok = False
                report.witnesses.append({"axiom": "identity", "x": x, "y": y, "d_xy": dxy})
            if j > i:
                dyx = float(space.dist(y, x))
                if dxy != dyx:
                    report.symmetry_ok = False
                    report.witnesses.append({"axiom": "symmetry", "x": x, "y": y, "d_xy": dxy, "d_yx": dyx})
    report.details["sample_size"] = len(pts)
    return report


@dataclass(frozen=True)
class SequenceWitness:
    seq_a: Sequence
    seq_b: Sequence
    target: Point
    horizon: int

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be positive")
        if len(self.seq_a) != len(self.seq_b) or len(self.seq_a) < self.horizon:
            raise ValueError("witness sequences need equal length >= horizon")


def tail_sup(values: Sequence[float], window: int) -> float:
    """limsup estimate: supremum over the trailing ``window`` entries."""
    return max(values[-window:])


def verify_relaxed_triangle(
    space: SuperMetricSpace,
    witness: SequenceWitness,
    tail_window: int = 16,
    tol: float = 1e-9,
) -> AxiomReport:
    """Check ``limsup d(b_n, z) <= s * limsup d(a_n, z)`` for one vanishing witness pair.

    The witness is inadmissible (reported, not failed) when ``d(a_n, b_n)`` does not
    vanish over the tail window, when the sequences coincide on the tail, or when
    the horizon is shorter than two windows.
    """
    report = AxiomReport()
    h = witness.horizon
    a = list(witness.seq_a)[:h]
    b = list(witness.seq_b)[:h]
    z = witness.target
    gap = [distance(space, x, y) for x, y in zip(a, b)]
    distinct = any(not same_point(x, y) for x, y in zip(a[-tail_window:], b[-tail_window:]))
    vanishing = tail_sup(gap, tail_window) < tol
    long_enough = h >= 2 * tail_window
    report.details.update(pair_gap_tail=tail_sup(gap, tail_window), distinct=distinct, long_enough=long_enough)
    if not (vanishing and distinct and long_enough):
        report.witness_admissible = False
        report.details["reason"] = "witness inadmissible"
        return report
    report.witness_admissible = True
    lim_b = tail_sup([distance(space, y, z) for y in b], tail_window)
    lim_a = tail_sup([distance(space, x, z) for x in a], tail_window)
    report.triangle_ok = lim_b <= space.coeff_s * lim_a + tol
    report.details.update(limsup_b=lim_b, limsup_a=lim_a, coeff_s=space.coeff_s)
    if not report.triangle_ok:
        report.witnesses.append({"axiom": "relaxed-triangle", "limsup_b": lim_b, "limsup_a": lim_a})
    return report


def verify_triangle_triples(space: SuperMetricSpace, triples: Iterable[tuple], tol: float = 0.0) -> AxiomReport:
    """Check ``d(x,z) <= s * (d(x,y) + d(y,z))`` on explicit triples.

    This b-metric form implies the limsup condition for every vanishing pair,
    so passing it supports the relaxed triangle for all witnesses at once.
    """
    report = AxiomReport(triangle_ok=True)
    s = space.coeff_s
    count = 0
    for x, y, z in triples:
        count += 1
        dxz = distance(space, x, z)
        bound = s * (distance(space, x, y) + distance(space, y, z))
        if dxz > bound + tol:
            report.triangle_ok = False
            report.witnesses.append({"axiom": "triangle", "x": x, "y": y, "z": z, "d_xz": dxz, "bound": bound})
    report.details.update(triples=count, coeff_s=s)
    return report


def finite_triangle_coefficient(space: SuperMetricSpace, sample: Sequence[Point] | None = None) -> float:
    """Smallest ``s`` with ``d(x,z) <= s (d(x,y) + d(y,z))`` over all sampled triples."""
    pts = list(space.sample() if sample is None else sample)
    best = 1.0
    for x, y, z in product(pts, repeat=3):
        if same_point(x, z):
            continue
        denom = space.dist(x, y) + space.dist(y, z)
        num = space.dist(x, z)
        if denom == 0:
            # only reachable when identity fails
            if num > 0:
                return math.inf
            continue
        best = max(best, num / denom)
    return best


def is_cauchy(points: Sequence[Point], space: SuperMetricSpace, horizon: int, tol: float) -> tuple[bool, list[float]]:
    """Finite-horizon Cauchy proxy.

    ``diag[n] = max{d(x_n, x_p) : n < p < horizon}``; the sequence passes when the
    last entry is below ``tol``.
    """
    if horizon < 2 or len(points) < horizon:
        raise ValueError("need 2 <= horizon <= len(points)")
    pts = list(points)[:horizon]
    diag = []
    for n in range(horizon - 1):
        diag.append(max(float(space.dist(pts[n], q)) for q in pts[n + 1 :]))
    return diag[-1] < tol, diag
