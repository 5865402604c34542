"""Executable fixtures for the worked examples, with their expected outcomes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from . import ffunctions as ff
from .contraction import (
    MAX,
    MEAN,
    MIN,
    AuxiliaryMap,
    ContractionKind,
    beta_boundary,
    certificate_trend,
    certify_beta,
    certify_omega,
    check_condition_i,
    collapse_aux,
    constant_aux,
)
from .picard import decrement_bound, fixed_points, iterate, picard_operator_check
from .spaces import (
    FiniteDomain,
    IntervalDomain,
    SuperMetricSpace,
    euclidean,
    intro_supermetric,
    unit_interval_supermetric,
    verify_point_axioms,
)

K = ContractionKind

EXAMPLE_IDS = (
    "cube-sum",
    "unit-interval-sf",
    "powers-of-three",
    "bianchini-unit",
    "finite-four",
    "intro-supermetric",
)

DEFAULT_HORIZON = {"cube-sum": 30, "powers-of-three": 20}
DEFAULT_STEP = 0.01


@dataclass
class ExampleFixture:
    id: str
    space: SuperMetricSpace
    map_T: Callable | None
    aux_S: AuxiliaryMap | None
    f: ff.FFunction | None
    kind: ContractionKind | None
    truncation: dict
    expected: dict = field(default_factory=dict)


def cube_sum_points(n: int) -> list[int]:
    return [(k * (k + 1) // 2) ** 2 for k in range(1, n + 1)]


def powers_of_three_points(n: int) -> list[int]:
    return [1] + [3**k for k in range(2, n + 1)]


def shift_down(points: list) -> Callable:
    """``T(x_1) = x_1`` and ``T(x_k) = x_{k-1}``."""
    prev = {p: points[max(i - 1, 0)] for i, p in enumerate(points)}

    def T(x):
        return prev[x]

    return T


def sequence_space(points: list, name: str) -> SuperMetricSpace:
    return SuperMetricSpace(FiniteDomain(tuple(points)), euclidean, 1.0, name)


def unit_interval_map(x: float) -> float:
    return 1 / 8 if x == 1 else x / 4


def bianchini_unit_map(x: float) -> float:
    return 0.7 if x == 1 else 0.95


FINITE_FOUR_MAP = {1: 2, 4: 2, 2: 3, 3: 3}


def finite_four_distance(x: int, y: int) -> int:
    if x == 1 or y == 1:
        other = y if x == 1 else x
        return (1 - other**3) ** 2
    return (x - y) ** 2


def finite_four_space() -> SuperMetricSpace:
    return SuperMetricSpace(FiniteDomain((1, 2, 3, 4)), finite_four_distance, 2.0, "finite-four")


def build_example(id: str, horizon: int | None = None, step: float | None = None) -> ExampleFixture:
    step = DEFAULT_STEP if step is None else step
    if id == "cube-sum":
        n = horizon or DEFAULT_HORIZON[id]
        pts = cube_sum_points(n)
        return ExampleFixture(
            id, sequence_space(pts, f"cube-sum(N={n})"), shift_down(pts), constant_aux(1), ff.LN_PLUS_ID,
            K.SF, {"horizon": n},
            {"omega_min": 27.0, "sb_sup": (pts[-2] - 1) / (pts[-1] - 1) if n >= 2 else None},
        )
    if id == "powers-of-three":
        n = horizon or DEFAULT_HORIZON[id]
        pts = powers_of_three_points(n)
        return ExampleFixture(
            id, sequence_space(pts, f"powers-of-three(N={n})"), shift_down(pts), MAX, ff.LN_PLUS_ID,
            K.KANNAN_SF, {"horizon": n},
            {"omega_min": 0.5, "sk_sup": (3 ** (n - 1) - 1) / (2 * 3 ** (n - 1))},
        )
    if id == "unit-interval-sf":
        space = SuperMetricSpace(
            IntervalDomain(0.0, 1.0, step, breakpoints=(0.0, 1.0)), unit_interval_supermetric, 1.0, id
        )
        return ExampleFixture(
            id, space, unit_interval_map, MEAN, ff.NEG_INV_SQRT, K.SF, {"step": step},
            {"omega": 4 * math.sqrt(2) / math.sqrt(5) - 1, "limit": 0.0},
        )
    if id == "bianchini-unit":
        space = SuperMetricSpace(IntervalDomain(0.0, 1.0, step), euclidean, 1.0, id)
        return ExampleFixture(
            id, space, bianchini_unit_map, MIN, ff.LN, K.BIANCHINI_SF, {"step": step},
            {"omega": {name: f(0.3) - f(0.25) for name, f in ff.BUILTINS.items()}, "fixed_point": 0.95},
        )
    if id == "finite-four":
        return ExampleFixture(
            id, finite_four_space(), FINITE_FOUR_MAP.__getitem__, collapse_aux(1), ff.LN, K.BIANCHINI_SF, {},
            {
                "omega_claimed": math.log(4018) - math.log(725),
                "fixed_point": 3,
                "discrepancy": "contraction fails at (1,2) with gap 0 and at (1,3) with a negative gap",
            },
        )
    if id == "intro-supermetric":
        space = SuperMetricSpace(IntervalDomain(0.0, 10.0, 0.5), intro_supermetric, 1.0, id)
        return ExampleFixture(id, space, None, None, None, None, {"step": 0.5}, {"d(0,1)": 0.5, "d(2,3)": 5 / 6})
    raise KeyError(f"unknown example id {id!r}; known: {', '.join(EXAMPLE_IDS)}")


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


def _row(id, check, computed, expected, ok, note="", discrepancy=False):
    status = "discrepancy" if discrepancy else ("pass" if ok else "fail")
    return {"id": id, "check": check, "computed": computed, "expected": expected, "status": status, "note": note}


def horizon_trend(id: str, kind: ContractionKind, horizon: int, start: int = 3) -> dict:
    """Beta certificates of a sequence fixture at every horizon ``start..horizon``."""
    vals = []
    for m in range(start, horizon + 1):
        sub = build_example(id, horizon=m)
        vals.append(certify_beta(kind, sub.space, sub.map_T, sub.aux_S, keep_records=False).value)
    return certificate_trend(vals, beta_boundary(kind))


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def _run_cube_sum(fx: ExampleFixture) -> list[dict]:
    n = fx.truncation["horizon"]
    rows = []
    sb = certify_beta(K.SB, fx.space, fx.map_T, fx.aux_S, keep_records=False)
    rows.append(_row(fx.id, "SB sup ratio", sb.value, fx.expected["sb_sup"], _rel(sb.value, fx.expected["sb_sup"]) <= 1e-12))
    trend = horizon_trend(fx.id, K.SB, n)
    rows.append(_row(fx.id, "SB ratio increases toward 1 with horizon", trend["limit_refutes"], True,
                     trend["limit_refutes"], "not an S^B-contraction in the limit"))
    sf = certify_omega(K.SF, fx.space, fx.map_T, fx.aux_S, fx.f, keep_records=False)
    rows.append(_row(fx.id, "SF omega (ln+id)", sf.value, fx.expected["omega_min"],
                     sf.certified and sf.value >= fx.expected["omega_min"]))
    fps, unique = fixed_points(fx.space, fx.map_T)
    rows.append(_row(fx.id, "fixed points", fps, [1], unique and fps == [1]))
    return rows


def _run_powers(fx: ExampleFixture) -> list[dict]:
    n = fx.truncation["horizon"]
    rows = []
    sk = certify_beta(K.SK, fx.space, fx.map_T, fx.aux_S, keep_records=False)
    rows.append(_row(fx.id, "SK sup ratio", sk.value, fx.expected["sk_sup"], abs(sk.value - fx.expected["sk_sup"]) <= 1e-6))
    trend = horizon_trend(fx.id, K.SK, n)
    rows.append(_row(fx.id, "SK ratio increases toward 1/2 with horizon", trend["limit_refutes"], True,
                     trend["limit_refutes"], "not an S^K-contraction in the limit"))
    ksf = certify_omega(K.KANNAN_SF, fx.space, fx.map_T, fx.aux_S, fx.f, keep_records=False)
    rows.append(_row(fx.id, "KannanSF omega (ln+id)", ksf.value, fx.expected["omega_min"],
                     ksf.certified and ksf.value >= fx.expected["omega_min"]))
    ok, fails = check_condition_i(K.KANNAN_SF, fx.space, fx.map_T, fx.aux_S)
    rows.append(_row(fx.id, "condition (i)", ok, True, ok))
    return rows


def _run_unit_interval(fx: ExampleFixture) -> list[dict]:
    rows = []
    sf = certify_omega(K.SF, fx.space, fx.map_T, fx.aux_S, fx.f, keep_records=False)
    target = fx.expected["omega"]
    rows.append(_row(fx.id, "SF omega (-1/sqrt t)", sf.value, target, sf.certified and abs(sf.value - target) <= 1e-3))
    starts = [i / 19 for i in range(20)]
    # d(0, y) = y here, so a 1e-12 step leaves iterates about 1e-6 from the limit
    chk = picard_operator_check(fx.space, fx.map_T, starts, max_iter=200, tol=1e-12, S=fx.aux_S, limit_tol=1e-5)
    limit_ok = chk.ok and all(abs(r["limit"]) < 1e-5 for r in chk.limits)
    rows.append(_row(fx.id, "Picard limit from 20 starts", max(abs(r["limit"]) for r in chk.limits), 0.0, limit_ok))
    last = max(r["final_step"] for r in chk.limits)
    rows.append(_row(fx.id, "final step distance", last, "< 1e-12", last < 1e-12))
    dec = all(decrement_bound(tr, fx.f, 1.5).ok for tr in chk.traces)
    rows.append(_row(fx.id, "decrement bound at omega = 1.5", dec, True, dec))
    return rows


def _run_bianchini_unit(fx: ExampleFixture) -> list[dict]:
    rows = []
    for name, f in ff.BUILTINS.items():
        c = certify_omega(K.BIANCHINI_SF, fx.space, fx.map_T, fx.aux_S, f, keep_records=False)
        target = fx.expected["omega"][name]
        rows.append(_row(fx.id, f"BianchiniSF omega ({name})", c.value, target,
                         c.certified and abs(c.value - target) <= 1e-9))
    ksf = certify_omega(K.KANNAN_SF, fx.space, fx.map_T, fx.aux_S, ff.LN, keep_records=True)
    at = ksf.record_for(0.8, 1.0)
    rows.append(_row(fx.id, "KannanSF refuted at (0.8, 1)", at.score, "< 0", ksf.verdict == "refuted" and at.score < 0,
                     "Bianchini S^F strictly larger than Kannan S^F"))
    starts = [0.0, 0.3, 0.7, 1.0]
    steps = [iterate(fx.space, fx.map_T, x0, max_iter=10).n_steps - 1 for x0 in starts]
    fps, unique = fixed_points(fx.space, fx.map_T)
    rows.append(_row(fx.id, "fixed point reached in <= 2 steps", max(steps), 2,
                     max(steps) <= 2 and unique and fps == [0.95]))
    return rows


def _run_finite_four(fx: ExampleFixture) -> list[dict]:
    rows = []
    c = certify_omega(K.BIANCHINI_SF, fx.space, fx.map_T, fx.aux_S, fx.f)
    g43 = c.record_for(4, 3).score
    rows.append(_row(fx.id, "gap at (4,3)", g43, fx.expected["omega_claimed"],
                     abs(g43 - fx.expected["omega_claimed"]) <= 1e-12))
    bad = sorted((v["x"], v["y"]) for v in c.violations)
    rows.append(_row(fx.id, "violating pairs", bad, [], not bad, fx.expected["discrepancy"], discrepancy=bool(bad)))
    fps, unique = fixed_points(fx.space, fx.map_T)
    rows.append(_row(fx.id, "fixed points", fps, [3], unique and fps == [3]))
    return rows


def _run_intro(fx: ExampleFixture) -> list[dict]:
    rep = verify_point_axioms(fx.space, fx.space.sample())
    d01, d23 = fx.space.dist(0.0, 1.0), fx.space.dist(2.0, 3.0)
    return [
        _row(fx.id, "point axioms", rep.identity_ok and rep.symmetry_ok, True, rep.identity_ok and rep.symmetry_ok),
        _row(fx.id, "d(0,1)", d01, 0.5, d01 == 0.5),
        _row(fx.id, "d(2,3)", d23, 5 / 6, abs(d23 - 5 / 6) <= 1e-15),
    ]


_RUNNERS = {
    "cube-sum": _run_cube_sum,
    "unit-interval-sf": _run_unit_interval,
    "powers-of-three": _run_powers,
    "bianchini-unit": _run_bianchini_unit,
    "finite-four": _run_finite_four,
    "intro-supermetric": _run_intro,
}


def run_example(id: str, horizon: int | None = None, step: float | None = None) -> list[dict]:
    return _RUNNERS[id](build_example(id, horizon, step))


def run_all(ids=None, horizon: int | None = None, step: float | None = None) -> list[dict]:
    """One row per check; discrepancies are rows, not exceptions."""
    rows = []
    for id in ids or EXAMPLE_IDS:
        h = horizon if id in DEFAULT_HORIZON else None
        rows.extend(run_example(id, h, step))
    return rows
