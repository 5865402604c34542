import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superfix import ffunctions as ff
from superfix.contraction import (
    FIRST,
    MAX,
    MEAN,
    MIN,
    SECOND,
    ContractionKind as K,
    certificate_trend,
    certify,
    certify_beta,
    certify_omega,
    check_condition_i,
    check_diagonal,
    collapse_aux,
    constant_aux,
    default_pairs,
    pair_terms,
    shift_aux,
)
from superfix.fixtures import build_example, finite_four_space
from superfix.spaces import DomainError, FiniteDomain, IntervalDomain, SuperMetricSpace, euclidean, finite_space

IDENTITY = lambda x: x  # noqa: E731


# auxiliary maps


def test_diagonal_flags_match_behaviour():
    pts = [0.0, 0.5, 1.0]
    for aux in (FIRST, SECOND, MIN, MAX, MEAN, collapse_aux(1)):
        assert aux.diagonal_identity and check_diagonal(aux, pts) == []
    assert check_diagonal(constant_aux(1), pts) == [0.0, 0.5]
    assert shift_aux(1.0)(2.0, 3.0) == 4.0


# pair terms


def test_finite_four_pair_four_three():
    fx = build_example("finite-four")
    t = pair_terms(K.BIANCHINI_SF, fx.space, fx.map_T, fx.aux_S, 4, 3)
    assert (t.lhs, t.rhs) == (725.0, 4018.0)
    # independent oracle from the distance formula
    d = lambda x, y: (1 - max(x, y) ** 3) ** 2 if 1 in (x, y) else (x - y) ** 2  # noqa: E731
    c4 = d(4, 1) + d(2, 1)  # S(4, T4) = S(4, 2) = 1
    lhs = d(2, 1) + d(3, 1)  # S(T4, T3) = S(2, 3) = 1
    assert (lhs, c4) == (725, 4018)


def test_identity_map_admissible_only_off_diagonal():
    # lhs reduces to a distance between distinct points, so only x = y drops out
    space = finite_four_space()
    for kind in K:
        for x, y in default_pairs(space):
            t = pair_terms(kind, space, IDENTITY, collapse_aux(1), x, y)
            assert t.admissible == (x != y)


def test_identity_map_is_never_a_contraction():
    space = finite_four_space()
    cert = certify_beta(K.BANACH, space, IDENTITY)
    assert cert.value == 1.0 and cert.verdict == "refuted"


def test_constant_map_has_no_admissible_pairs():
    space = finite_four_space()
    for kind in (K.SF, K.BIANCHINI_SF, K.F_WARDOWSKI):
        t = pair_terms(kind, space, lambda x: 3, collapse_aux(1), 2, 4)
        assert not t.admissible


def test_unit_interval_case_one_formulas():
    fx = build_example("unit-interval-sf")
    t = pair_terms(K.SF, fx.space, fx.map_T, fx.aux_S, 0.2, 0.6)
    s = 0.2 + 0.6
    assert t.lhs == pytest.approx(s**2 / 32, rel=1e-14)
    assert t.rhs == pytest.approx(s**2 / 2, rel=1e-14)


# omega certificates


def test_cube_sum_sf_certified_above_27():
    fx = build_example("cube-sum", horizon=30)
    cert = certify_omega(K.SF, fx.space, fx.map_T, fx.aux_S, ff.LN_PLUS_ID)
    assert cert.certified and cert.value >= 27


def test_finite_four_refuted_with_exact_gaps():
    fx = build_example("finite-four")
    cert = certify_omega(K.BIANCHINI_SF, fx.space, fx.map_T, fx.aux_S, ff.LN)
    assert cert.verdict == "refuted" and cert.pairs_checked == 16
    bad = {(v["x"], v["y"]): v["gap"] for v in cert.violations}
    assert {(1, 2), (1, 3)} <= set(bad)
    assert bad[(1, 2)] == 0.0
    assert bad[(1, 3)] == pytest.approx(math.log(49) - math.log(725), rel=1e-12)
    assert cert.record_for(4, 3).score == pytest.approx(math.log(4018) - math.log(725), rel=1e-12)


def test_powers_of_three_kannan_sf():
    fx = build_example("powers-of-three", horizon=20)
    cert = certify_omega(K.KANNAN_SF, fx.space, fx.map_T, fx.aux_S, ff.LN_PLUS_ID)
    assert cert.certified and cert.value >= 0.5
    assert check_condition_i(K.KANNAN_SF, fx.space, fx.map_T, fx.aux_S) == (True, [])


def test_bianchini_unit_condition_i():
    fx = build_example("bianchini-unit")
    ok, fails = check_condition_i(K.BIANCHINI_SF, fx.space, fx.map_T, fx.aux_S)
    assert ok and fails == []


def test_condition_i_constant_map_vacuous():
    assert check_condition_i(K.BIANCHINI_SF, finite_four_space(), lambda x: 3, collapse_aux(1)) == (True, [])


def test_condition_i_fails_for_identity():
    # C = D = 0 for every point while the image pair is still apart
    ok, fails = check_condition_i(K.BIANCHINI_SF, finite_four_space(), IDENTITY, collapse_aux(1))
    assert not ok and len(fails) == 12


def test_rhs_zero_is_violation():
    # S = 0 gives rhs = 0 at the pair (0, 0) while T moves 0 away
    space = finite_space([0, 1], [[0, 1], [1, 0]])
    T = {0: 1, 1: 1}.__getitem__
    cert = certify_omega(K.SF, space, T, constant_aux(0), ff.LN)
    rec = cert.record_for(0, 0)
    assert (rec.lhs, rec.rhs, rec.score) == (2.0, 0.0, -math.inf)
    assert cert.verdict == "refuted" and cert.value == -math.inf


def test_vacuous_certificate():
    cert = certify_omega(K.SF, finite_four_space(), lambda x: 3, collapse_aux(1), ff.LN)
    assert cert.verdict == "vacuous" and cert.admissible_pairs == 0 and cert.violations == []


def test_tie_counts_as_violation():
    space = finite_space([0, 1], [[0, 1], [1, 0]])
    T = {0: 1, 1: 0}.__getitem__
    cert = certify_omega(K.F_WARDOWSKI, space, T, None, ff.LN)
    assert cert.value == 0.0 and cert.verdict == "refuted"


def test_map_leaving_domain_is_domain_error():
    space = SuperMetricSpace(FiniteDomain((0, 1)), euclidean)
    with pytest.raises(DomainError):
        certify_omega(K.F_WARDOWSKI, space, lambda x: x + 5, None, ff.LN)


# beta certificates


def test_cube_sum_sb_exact_fraction():
    fx = build_example("cube-sum", horizon=30)
    cert = certify_beta(K.SB, fx.space, fx.map_T, fx.aux_S)
    assert abs(cert.value - 189224 / 216224) / (189224 / 216224) <= 1e-12


def test_powers_of_three_sk_ratio():
    fx = build_example("powers-of-three", horizon=20)
    cert = certify_beta(K.SK, fx.space, fx.map_T, fx.aux_S)
    assert abs(cert.value - (3**19 - 1) / (2 * 3**19)) <= 1e-6
    assert cert.boundary == 0.5


def test_banach_half_map():
    space = SuperMetricSpace(IntervalDomain(0.0, 1.0, 0.05), euclidean)
    cert = certify_beta(K.BANACH, space, lambda x: x / 2)
    assert cert.certified and cert.value == pytest.approx(0.5, rel=1e-12)


def test_reich_coefficients_reported():
    space = SuperMetricSpace(IntervalDomain(0.0, 1.0, 0.1), euclidean)
    cert = certify_beta(K.REICH, space, lambda x: x / 4, reich=(1, 1, 1))
    a, b, c = cert.details["reich_coefficients"]
    assert cert.certified and a + b + c < 1


def test_trend_refutes_creeping_supremum():
    vals = [certify_beta(K.SK, f.space, f.map_T, f.aux_S).value
            for f in (build_example("powers-of-three", horizon=n) for n in range(3, 15))]
    tr = certificate_trend(vals, 0.5)
    assert tr["strictly_increasing"] and tr["limit_refutes"]
    assert not certificate_trend([0.4, 0.41, 0.415], 1.0)["limit_refutes"]


def test_certify_dispatch():
    fx = build_example("finite-four")
    assert certify(K.BIANCHINI_SF, fx.space, fx.map_T, fx.aux_S, ff.LN).mode == "omega-gap"
    assert certify(K.BANACH, fx.space, fx.map_T).mode == "beta-ratio"
    with pytest.raises(ValueError):
        certify(K.SF, fx.space, fx.map_T, fx.aux_S)


def test_certificate_dict_roundtrip_fields():
    fx = build_example("finite-four")
    d = certify(K.BIANCHINI_SF, fx.space, fx.map_T, fx.aux_S, ff.LN).to_dict(with_records=True)
    assert d["kind"] == "BianchiniSF" and len(d["records"]) == 16


# properties on random finite instances


@st.composite
def finite_instances(draw):
    n = draw(st.integers(2, 6))
    table = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = draw(st.floats(0.01, 100.0))
            table[i][j] = table[j][i] = v
    images = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    aux = draw(st.sampled_from([FIRST, SECOND, MIN, MAX, constant_aux(0), collapse_aux(n - 1)]))
    space = finite_space(list(range(n)), table)
    return space, images.__getitem__, aux


@settings(max_examples=200, deadline=None)
@given(inst=finite_instances())
def test_log_gap_matches_ratio(inst):
    space, T, S = inst
    om = certify_omega(K.SF, space, T, S, ff.LN)
    be = certify_beta(K.SB, space, T, S)
    if om.verdict == "vacuous":
        assert be.verdict == "vacuous"
        return
    expected = math.exp(-om.value)
    if math.isinf(be.value):
        assert math.isinf(expected)
    else:
        assert abs(expected - be.value) <= 1e-12 * be.value


@settings(max_examples=100, deadline=None)
@given(inst=finite_instances())
def test_first_projection_collapses_to_classical(inst):
    space, T, _ = inst
    for x, y in default_pairs(space):
        sf = pair_terms(K.SF, space, T, FIRST, x, y)
        fw = pair_terms(K.F_WARDOWSKI, space, T, None, x, y)
        sb = pair_terms(K.SB, space, T, FIRST, x, y)
        bn = pair_terms(K.BANACH, space, T, None, x, y)
        assert (sf.lhs, sf.rhs) == (fw.lhs, fw.rhs) == (sb.lhs, sb.rhs) == (bn.lhs, bn.rhs)


@settings(max_examples=100, deadline=None)
@given(inst=finite_instances())
def test_mean_never_exceeds_max(inst):
    space, T, S = inst
    for x, y in default_pairs(space):
        mean = pair_terms(K.KANNAN_SF, space, T, S, x, y).rhs
        mx = pair_terms(K.BIANCHINI_SF, space, T, S, x, y).rhs
        assert mean <= mx
    ks = certify_omega(K.KANNAN_SF, space, T, S, ff.LN_PLUS_ID)
    bs = certify_omega(K.BIANCHINI_SF, space, T, S, ff.LN_PLUS_ID)
    if ks.certified:
        assert bs.certified and bs.value >= ks.value - 1e-12


@settings(max_examples=100, deadline=None)
@given(inst=finite_instances(), seed=st.integers(0, 2**32 - 1))
def test_pair_order_does_not_matter(inst, seed):
    space, T, S = inst
    pairs = default_pairs(space)
    shuffled = list(pairs)
    random.Random(seed).shuffle(shuffled)
    for kind in (K.SF, K.BIANCHINI_SF):
        a = certify_omega(kind, space, T, S, ff.LN, pairs)
        b = certify_omega(kind, space, T, S, ff.LN, shuffled)
        assert a.value == b.value and a.verdict == b.verdict
    a = certify_beta(K.SK, space, T, S, pairs)
    b = certify_beta(K.SK, space, T, S, shuffled)
    assert a.value == b.value and a.verdict == b.verdict


@settings(max_examples=100, deadline=None)
@given(inst=finite_instances())
def test_certified_implies_positive_and_no_violations(inst):
    space, T, S = inst
    for kind in (K.SF, K.KANNAN_SF, K.BIANCHINI_SF):
        c = certify_omega(kind, space, T, S, ff.LN)
        if c.certified:
            assert c.value > 0 and not c.violations
        if c.verdict == "vacuous":
            assert c.admissible_pairs == 0
    c = certify_beta(K.SB, space, T, S)
    if c.certified:
        assert c.value < 1 and not c.violations
