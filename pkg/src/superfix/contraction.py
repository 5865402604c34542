"""Contraction inequalities evaluated pair by pair, and certificates built from them.

Two certificate modes exist:

* omega-gap: the infimum of ``F(rhs) - F(lhs)`` over admissible pairs
  (F-type contractions, certified when positive);
* beta-ratio: the supremum of ``lhs / rhs`` (classical and S^B/S^K types,
  certified when below the kind's boundary).

``lhs`` is always the displacement of the images, ``rhs`` the kind-specific
aggregate of the preimages.  Infinite spaces are handled by the caller's
truncation; the certificate records what was enumerated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Callable, Iterable, Sequence

from .ffunctions import FFunction
from .spaces import DomainError, Point, SuperMetricSpace, same_point

SelfMap = Callable[[Point], Point]


class ContractionKind(str, Enum):
    BANACH = "Banach"
    KANNAN = "Kannan"
    REICH = "Reich"
    BIANCHINI_CLASSIC = "BianchiniClassic"
    F_WARDOWSKI = "FWardowski"
    KANNAN_F = "KannanF"
    SB = "SB"
    SK = "SK"
    SF = "SF"
    KANNAN_SF = "KannanSF"
    BIANCHINI_SF = "BianchiniSF"


K = ContractionKind

OMEGA_KINDS = frozenset({K.SF, K.KANNAN_SF, K.BIANCHINI_SF, K.F_WARDOWSKI, K.KANNAN_F})
BETA_KINDS = frozenset({K.SB, K.SK, K.BANACH, K.KANNAN, K.BIANCHINI_CLASSIC, K.REICH})
S_KINDS = frozenset({K.SB, K.SK, K.SF, K.KANNAN_SF, K.BIANCHINI_SF})
CONDITION_I_KINDS = frozenset({K.KANNAN_SF, K.BIANCHINI_SF, K.KANNAN_F})
_MEAN = frozenset({K.SK, K.KANNAN_SF, K.KANNAN, K.KANNAN_F})
_MAX = frozenset({K.BIANCHINI_SF, K.BIANCHINI_CLASSIC})
EQUAL_REICH = (1 / 3, 1 / 3, 1 / 3)


def beta_boundary(kind: ContractionKind) -> float:
    """Supremum ratio that must not be reached.

    Kannan-type kinds are written ``lhs <= (beta/2) * (C + D)``; their ratio is
    reported as ``lhs / (C + D)``, so the boundary is 1/2.
    """
    return 0.5 if kind in (K.SK, K.KANNAN) else 1.0


@dataclass(frozen=True)
class AuxiliaryMap:
    name: str
    apply: Callable[[Point, Point], Point]
    diagonal_identity: bool = False

    def __call__(self, x: Point, y: Point) -> Point:
        return self.apply(x, y)


FIRST = AuxiliaryMap("first", lambda x, y: x, True)
SECOND = AuxiliaryMap("second", lambda x, y: y, True)
MIN = AuxiliaryMap("min", lambda x, y: min(x, y), True)
MAX = AuxiliaryMap("max", lambda x, y: max(x, y), True)
MEAN = AuxiliaryMap("mean", lambda x, y: (x + y) / 2, True)


def constant_aux(c: Point) -> AuxiliaryMap:
    return AuxiliaryMap(f"const({c})", lambda x, y: c, False)


def shift_aux(a: float) -> AuxiliaryMap:
    """``S(x, y) = y + a``."""
    return AuxiliaryMap(f"shift({a})", lambda x, y: y + a, False)


def collapse_aux(c: Point) -> AuxiliaryMap:
    """``S(x, y) = c`` for ``x != y`` and ``x`` on the diagonal."""
    return AuxiliaryMap(f"collapse({c})", lambda x, y: x if same_point(x, y) else c, True)


def check_diagonal(aux: AuxiliaryMap, sample: Iterable[Point]) -> list:
    """Points where ``S(x, x) != x`` (empty when the identity holds on ``sample``)."""
    return [x for x in sample if not same_point(aux(x, x), x)]


@dataclass(frozen=True)
class PairTerms:
    lhs: float
    rhs: float
    admissible: bool
    condition_i_ok: bool | None = None


def _two_sided(d, u: Point, v: Point, aux: AuxiliaryMap) -> float:
    m = aux(u, v)
    return d(u, m) + d(v, m)


def _self_displacement(d, x: Point, tx: Point, aux: AuxiliaryMap) -> float:
    # C(x) = d(x, S(x, Tx)) + d(Tx, S(x, Tx))
    return _two_sided(d, x, tx, aux)


def pair_terms(
    kind: ContractionKind,
    space: SuperMetricSpace,
    T: SelfMap,
    S: AuxiliaryMap | None,
    x: Point,
    y: Point,
    *,
    reich: Sequence[float] = EQUAL_REICH,
    images: tuple[Point, Point] | None = None,
) -> PairTerms:
    """Both sides of the ``kind`` inequality at the ordered pair ``(x, y)``."""
    kind = ContractionKind(kind)
    d = space.dist
    tx, ty = images if images is not None else (T(x), T(y))
    cond_i = None
    if kind in S_KINDS:
        if S is None:
            raise ValueError(f"{kind.value} needs an auxiliary map")
        lhs = _two_sided(d, tx, ty, S)
        if kind in (K.SF, K.SB):
            rhs = _two_sided(d, x, y, S)
        else:
            c = _self_displacement(d, x, tx, S)
            e = _self_displacement(d, y, ty, S)
            rhs = (c + e) / 2 if kind in _MEAN else max(c, e)
            if kind in CONDITION_I_KINDS:
                cond_i = lhs == 0 or c != 0 or e != 0
    else:
        lhs = d(tx, ty)
        if kind in (K.BANACH, K.F_WARDOWSKI):
            rhs = d(x, y)
        elif kind == K.REICH:
            a, b, cc = reich
            total = a + b + cc
            if not total > 0 or min(reich) < 0:
                raise ValueError("Reich coefficients must be nonnegative with positive sum")
            rhs = (a * d(x, tx) + b * d(y, ty) + cc * d(x, y)) / total
        else:
            c = d(x, tx)
            e = d(y, ty)
            rhs = (c + e) / 2 if kind in _MEAN else max(c, e)
            if kind in CONDITION_I_KINDS:
                cond_i = lhs == 0 or c != 0 or e != 0
    return PairTerms(float(lhs), float(rhs), lhs > 0, cond_i)


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------


@dataclass
class PairRecord:
    x: Point
    y: Point
    lhs: float
    rhs: float
    score: float | None
    admissible: bool
    condition_i_ok: bool | None = None


@dataclass
class ContractionCertificate:
    kind: ContractionKind
    mode: str
    value: float
    admissible_pairs: int
    violations: list
    verdict: str
    boundary: float | None = None
    pairs_checked: int = 0
    extremal_pair: tuple | None = None
    condition_i_failures: list = field(default_factory=list)
    f_name: str | None = None
    truncation: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    records: list = field(default_factory=list, repr=False)

    @property
    def certified(self) -> bool:
        return self.verdict == "certified"

    def record_for(self, x: Point, y: Point) -> PairRecord:
        for r in self.records:
            if same_point(r.x, x) and same_point(r.y, y):
                return r
        raise KeyError((x, y))

    def to_dict(self, with_records: bool = False) -> dict:
        out = {
            "kind": self.kind.value,
            "mode": self.mode,
            "F": self.f_name,
            "value": self.value,
            "boundary": self.boundary,
            "verdict": self.verdict,
            "pairs_checked": self.pairs_checked,
            "admissible_pairs": self.admissible_pairs,
            "extremal_pair": list(self.extremal_pair) if self.extremal_pair else None,
            "violations": self.violations,
            "condition_i_failures": self.condition_i_failures,
            "truncation": self.truncation,
            "details": self.details,
        }
        if with_records:
            out["records"] = [r.__dict__ for r in self.records]
        return out


def default_pairs(space: SuperMetricSpace) -> list[tuple]:
    """All ordered pairs of the space's sample, diagonal included."""
    pts = space.sample()
    return list(product(pts, repeat=2))


def _image_cache(space: SuperMetricSpace, T: SelfMap):
    cache: dict = {}

    def image(x):
        key = _key(x)
        if key not in cache:
            tx = T(x)
            if not space.contains(tx):
                raise DomainError(f"T({x!r}) = {tx!r} leaves the domain of {space.name}")
            cache[key] = tx
        return cache[key]

    return image


def _key(x):
    try:
        hash(x)
        return x
    except TypeError:
        return ("id", id(x))


def _scan(kind, space, T, S, pairs, reich, score_fn, keep_records):
    image = _image_cache(space, T)
    records, admissible, cond_fail = [], [], []
    n = 0
    for x, y in (default_pairs(space) if pairs is None else pairs):
        n += 1
        terms = pair_terms(kind, space, T, S, x, y, reich=reich, images=(image(x), image(y)))
        score = score_fn(terms) if terms.admissible else None
        rec = PairRecord(x, y, terms.lhs, terms.rhs, score, terms.admissible, terms.condition_i_ok)
        if keep_records:
            records.append(rec)
        if terms.admissible:
            admissible.append(rec)
        if terms.condition_i_ok is False:
            cond_fail.append({"x": x, "y": y, "lhs": terms.lhs})
    return n, records, admissible, cond_fail


def certify_omega(
    kind: ContractionKind,
    space: SuperMetricSpace,
    T: SelfMap,
    S: AuxiliaryMap | None,
    F: FFunction,
    pairs: Iterable[tuple] | None = None,
    *,
    keep_records: bool = True,
    truncation: dict | None = None,
) -> ContractionCertificate:
    """Infimum of ``F(rhs) - F(lhs)`` over admissible pairs.

    Pairs with ``rhs = 0 < lhs`` score ``-inf``; a gap of exactly 0 is a violation.
    """
    kind = ContractionKind(kind)
    if kind not in OMEGA_KINDS:
        raise ValueError(f"{kind.value} is not an omega-gap kind")

    def gap(t: PairTerms) -> float:
        if t.rhs <= 0:
            return -math.inf
        return F(t.rhs) - F(t.lhs)

    n, records, adm, cond_fail = _scan(kind, space, T, S, pairs, EQUAL_REICH, gap, keep_records)
    cert = ContractionCertificate(
        kind, "omega-gap", math.inf, len(adm), [], "vacuous",
        pairs_checked=n, condition_i_failures=cond_fail, f_name=F.name, truncation=dict(truncation or {}),
        records=records,
    )
    if not adm:
        return cert
    best = min(adm, key=lambda r: r.score)
    cert.value = best.score
    cert.extremal_pair = (best.x, best.y)
    cert.violations = [_violation(r, "gap") for r in adm if r.score <= 0]
    cert.verdict = "certified" if cert.value > 0 and not cert.violations and not cond_fail else "refuted"
    return cert


def certify_beta(
    kind: ContractionKind,
    space: SuperMetricSpace,
    T: SelfMap,
    S: AuxiliaryMap | None = None,
    pairs: Iterable[tuple] | None = None,
    *,
    margin: float = 1e-9,
    reich: Sequence[float] = EQUAL_REICH,
    keep_records: bool = True,
    truncation: dict | None = None,
) -> ContractionCertificate:
    """Supremum of ``lhs / rhs`` (``lhs / (C + D)`` for Kannan-type kinds).

    Certified when the supremum stays below ``boundary - margin``.  For Reich the
    weights are normalised, so a certified value ``v`` yields the coefficients
    ``v * (a, b, c) / (a + b + c)``.
    """
    kind = ContractionKind(kind)
    if kind not in BETA_KINDS:
        raise ValueError(f"{kind.value} is not a beta-ratio kind")
    boundary = beta_boundary(kind)
    scale = 0.5 if boundary == 0.5 else 1.0

    def ratio(t: PairTerms) -> float:
        if t.rhs <= 0:
            return math.inf
        return scale * t.lhs / t.rhs

    n, records, adm, cond_fail = _scan(kind, space, T, S, pairs, reich, ratio, keep_records)
    cert = ContractionCertificate(
        kind, "beta-ratio", 0.0, len(adm), [], "vacuous", boundary=boundary,
        pairs_checked=n, truncation=dict(truncation or {}), records=records,
    )
    if kind == K.REICH:
        cert.details["reich_weights"] = list(reich)
    if not adm:
        return cert
    worst = max(adm, key=lambda r: r.score)
    cert.value = worst.score
    cert.extremal_pair = (worst.x, worst.y)
    cert.violations = [_violation(r, "ratio") for r in adm if r.score >= boundary - margin]
    cert.verdict = "certified" if not cert.violations else "refuted"
    if kind == K.REICH and cert.certified:
        total = sum(reich)
        cert.details["reich_coefficients"] = [cert.value * w / total for w in reich]
    return cert


def _violation(r: PairRecord, label: str) -> dict:
    return {"x": r.x, "y": r.y, "lhs": r.lhs, "rhs": r.rhs, label: r.score}


def certify(kind, space, T, S=None, F=None, pairs=None, **kw) -> ContractionCertificate:
    """Dispatch to the omega or beta certificate according to ``kind``."""
    kind = ContractionKind(kind)
    if kind in OMEGA_KINDS:
        if F is None:
            raise ValueError(f"{kind.value} needs an F function")
        kw.pop("margin", None)
        kw.pop("reich", None)
        return certify_omega(kind, space, T, S, F, pairs, **kw)
    return certify_beta(kind, space, T, S, pairs, **kw)


def check_condition_i(
    kind: ContractionKind,
    space: SuperMetricSpace,
    T: SelfMap,
    S: AuxiliaryMap | None,
    pairs: Iterable[tuple] | None = None,
) -> tuple[bool, list]:
    """Clause (i): a nonzero image displacement needs a nonzero C or D."""
    kind = ContractionKind(kind)
    if kind not in CONDITION_I_KINDS:
        raise ValueError(f"{kind.value} has no clause (i)")
    _, _, _, fails = _scan(kind, space, T, S, pairs, EQUAL_REICH, lambda t: 0.0, False)
    return not fails, fails


def certificate_trend(values: Sequence[float], boundary: float) -> dict:
    """Summarise beta-certificate values over growing truncations.

    Every finite truncation may certify while the supremum creeps toward
    ``boundary``.  The limit is taken to refute the kind when the values
    increase strictly and the gap to ``boundary`` at least halves across the
    range; this is finite-horizon evidence, not a proof.
    """
    inc = all(b > a for a, b in zip(values, values[1:]))
    gaps = [boundary - v for v in values]
    shrinking = len(gaps) >= 2 and gaps[-1] <= 0.5 * gaps[0]
    return {
        "values": list(values),
        "strictly_increasing": inc,
        "final_gap_to_boundary": gaps[-1] if gaps else None,
        "limit_refutes": inc and shrinking,
    }
