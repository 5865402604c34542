"""Picard iteration traces and the convergence diagnostics run on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from .contraction import SECOND, AuxiliaryMap
from .ffunctions import FFunction
from .spaces import DomainError, Point, SuperMetricSpace, is_cauchy, same_point

EXACT = "exact-fixed-point"
TOLERANCE = "tolerance"
MAX_ITER = "max-iterations"


@dataclass
class PicardTrace:
    """Iterates ``x_0 .. x_N`` of ``x_{n+1} = T(x_n)`` with per-step distances.

    ``lambda_seq[n] = d(x_{n+1}, S(x_{n+1}, x_n))`` and
    ``eta_seq[n] = d(x_n, S(x_{n+1}, x_n))``; all three per-step lists have
    length ``N``.
    """

    iterates: list
    step_dist: list[float]
    lambda_seq: list[float]
    eta_seq: list[float]
    stop_reason: str
    space: SuperMetricSpace = field(repr=False)
    aux: AuxiliaryMap = field(repr=False)

    @property
    def n_steps(self) -> int:
        return len(self.step_dist)

    @property
    def final(self) -> Point:
        return self.iterates[-1]

    @property
    def sums(self) -> list[float]:
        return [lam + eta for lam, eta in zip(self.lambda_seq, self.eta_seq)]

    def displacement_sums(self) -> list[float]:
        """``d(x_n, S(x_n, x_{n+1})) + d(x_{n+1}, S(x_n, x_{n+1}))`` per step."""
        d, S = self.space.dist, self.aux
        out = []
        for x, y in zip(self.iterates, self.iterates[1:]):
            m = S(x, y)
            out.append(d(x, m) + d(y, m))
        return out


def iterate(
    space: SuperMetricSpace,
    T: Callable[[Point], Point],
    x0: Point,
    max_iter: int = 1000,
    tol: float = 0.0,
    S: AuxiliaryMap | None = None,
) -> PicardTrace:
    """Run the Picard recurrence from ``x0``.

    Stops at the first exact fixed point, when a step distance drops below
    ``tol``, or after ``max_iter`` steps.  ``S`` defaults to ``S(x, y) = y`` which
    makes ``lambda`` the step distance and ``eta`` zero.
    """
    S = SECOND if S is None else S
    if not space.contains(x0):
        raise DomainError(f"start {x0!r} is not in the domain of {space.name}")
    d = space.dist
    xs, steps, lams, etas = [x0], [], [], []
    reason = MAX_ITER
    x = x0
    for n in range(max_iter):
        y = T(x)
        if not space.contains(y):
            raise DomainError(f"iterate {n + 1} ({y!r}) leaves the domain of {space.name}")
        m = S(y, x)
        xs.append(y)
        steps.append(float(d(x, y)))
        lams.append(float(d(y, m)))
        etas.append(float(d(x, m)))
        if same_point(x, y):
            reason = EXACT
            break
        if steps[-1] < tol:
            reason = TOLERANCE
            break
        x = y
    return PicardTrace(xs, steps, lams, etas, reason, space, S)


def asymptotic_regularity(trace: PicardTrace, tol: float = 1e-9, window: int = 16) -> bool:
    """Step distances over the trailing window lie below ``tol``.

    A trace that ends at an exact fixed point has an all-zero tail from then on.
    """
    if not trace.step_dist:
        raise ValueError("empty trace")
    if trace.stop_reason == EXACT:
        return True
    return max(trace.step_dist[-window:]) < tol


@dataclass
class DecrementCheck:
    ok: bool
    margins: list[tuple[int, float]]


def decrement_bound(trace: PicardTrace, F: FFunction, omega: float, slack: float = 1e-9) -> DecrementCheck:
    """Check ``F(lam_n + eta_n) <= F(lam_0 + eta_0) - n * omega`` along the trace.

    Zero sums mark arrival at a fixed point and are skipped.
    """
    sums = trace.sums
    if not sums or sums[0] <= 0:
        return DecrementCheck(True, [])
    base = F(sums[0])
    margins = []
    for n, s in enumerate(sums[1:], start=1):
        if s <= 0:
            continue
        margins.append((n, base - n * omega - F(s)))
    return DecrementCheck(all(m >= -slack for _, m in margins), margins)


def bianchini_monotone(trace: PicardTrace) -> bool:
    """Displacement sums strictly decrease until they first hit zero."""
    seq = trace.displacement_sums()
    for a, b in zip(seq, seq[1:]):
        if a == 0:
            return True
        if not b < a:
            return False
    return True


def fixed_points(space: SuperMetricSpace, T: Callable[[Point], Point], sample: Sequence[Point] | None = None):
    """Exact enumeration of ``{x : T(x) = x}`` over a finite sample."""
    pts = space.sample() if sample is None else list(sample)
    fixed = [x for x in pts if same_point(T(x), x)]
    return fixed, len(fixed) == 1


def continuity_diagnostic(trace: PicardTrace, T: Callable[[Point], Point], window: int = 16) -> float:
    """Tail supremum of ``d(T(x_n), T(limit))`` with the final iterate as the limit.

    Small values support the hypothesis that ``d(T^n u, v) -> 0`` carries over to
    ``d(T(T^n u), T v) -> 0`` for this instance.
    """
    limit = trace.final
    t_lim = T(limit)
    tail = trace.iterates[-window:]
    return max(float(trace.space.dist(T(x), t_lim)) for x in tail)


@dataclass
class PicardCheck:
    verdict: str  # "picard", "not-picard" or "inconclusive"
    limits: list[dict]
    traces: list[PicardTrace] = field(repr=False, default_factory=list)

    @property
    def ok(self) -> bool:
        return self.verdict == "picard"


def picard_operator_check(
    space: SuperMetricSpace,
    T: Callable[[Point], Point],
    starts: Sequence[Point],
    max_iter: int = 1000,
    tol: float = 1e-12,
    S: AuxiliaryMap | None = None,
    limit_tol: float = 1e-9,
) -> PicardCheck:
    """All traces converge and their terminal points agree within ``limit_tol``."""
    if not starts:
        raise ValueError("starts must be nonempty")
    traces, rows = [], []
    inconclusive = False
    for x0 in starts:
        tr = iterate(space, T, x0, max_iter, tol, S)
        traces.append(tr)
        if tr.stop_reason == MAX_ITER:
            inconclusive = True
            cauchy = False
        elif len(tr.iterates) >= 2:
            cauchy, _ = is_cauchy(tr.iterates, space, len(tr.iterates), max(tol, limit_tol))
            cauchy = cauchy or tr.stop_reason == EXACT
        else:
            cauchy = True
        rows.append(
            {
                "start": x0,
                "limit": tr.final,
                "steps": tr.n_steps,
                "stop_reason": tr.stop_reason,
                "final_step": tr.step_dist[-1],
                "cauchy": cauchy,
            }
        )
    if inconclusive:
        return PicardCheck("inconclusive", rows, traces)
    ref = traces[0].final
    agree = all(float(space.dist(tr.final, ref)) <= limit_tol for tr in traces)
    ok = agree and all(r["cauchy"] for r in rows)
    return PicardCheck("picard" if ok else "not-picard", rows, traces)
