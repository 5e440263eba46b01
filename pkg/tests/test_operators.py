"""Half-step operators, iterate families, tail indices, growth checks."""
from __future__ import annotations

import math

import numpy as np
import pytest

from vrrwlab.calculus import compute_W, invert_W
from vrrwlab.grid import GridFn, ScaledIdentity, Tail, geometric_nodes
from vrrwlab.operators import (
    ClassificationError,
    apply_G,
    apply_H,
    build_f_eta,
    choose_epsilon,
    classify_tail,
    conjugate_iterate,
    g_sequence,
    growth_sandwich_check,
    index_limits,
    index_sweep,
    phi_family,
    psi_profile,
)
from vrrwlab.weights import (
    critical_weight,
    linear_weight,
    polylog_weight,
)

LIN = linear_weight(1.0)
PL6 = polylog_weight(0.6)
PL4 = polylog_weight(0.4)


def identity(u):
    return np.asarray(u, dtype=float)


# ---------------------------------------------------------------------------
# fixed points
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("spec", [LIN, PL6], ids=lambda s: s.label)
def test_G_identity_fixed_point_is_exact(spec):
    g = apply_G(spec, identity, u_top=1e12)
    assert np.max(np.abs(g.values - g.nodes)) == 0.0


def test_H_identity_fixed_point():
    h = apply_H(LIN, ScaledIdentity(1.0), x_top=1e8)
    assert np.max(np.abs(h.values - h.nodes)) == 0.0


# ---------------------------------------------------------------------------
# half-step closed forms (linear weight)
# ---------------------------------------------------------------------------

def test_H_half_identity_closed_form():
    # H(x/2) = W^{-1}(log(1+2x)/2) = sqrt(1+2x) - 1 for the linear family
    h = apply_H(LIN, ScaledIdentity(0.5), x_top=1e8)
    assert float(h(8.0)) == pytest.approx(math.sqrt(17.0) - 1.0, rel=1e-6)
    xs = np.geomspace(0.01, 50.0, 60)
    rel = np.abs(np.asarray(h(xs)) / (np.sqrt(1.0 + 2.0 * xs) - 1.0) - 1.0)
    assert np.max(rel) < 5e-7


@pytest.mark.parametrize("spec", [LIN, PL6], ids=lambda s: s.label)
@pytest.mark.parametrize("eta", [0.4, 0.5, 0.6])
def test_H_scaled_identity_conjugation(spec, eta):
    # H(eta*Id)(x) = W^{-1}(eta * W(x/eta)) wherever x/eta stays in the hull
    w = compute_W(spec, 1e12)
    winv = invert_W(w)
    phi2 = apply_H(spec, ScaledIdentity(eta), x_top=1e12)
    xs = np.geomspace(1e-2, 0.9 * eta * 1e12, 200)
    ref = np.asarray(winv(eta * np.asarray(w(xs / eta))))
    assert np.max(np.abs(np.asarray(phi2(xs)) / ref - 1.0)) < 1e-6


def test_H_is_monotone_in_its_argument():
    # smaller argument functions give smaller images, 50 seeded scale pairs
    rng = np.random.default_rng(7)
    xs = np.geomspace(0.1, 1e5, 40)
    for _ in range(50):
        a, b = np.sort(rng.uniform(0.2, 0.95, size=2))
        lo = apply_H(LIN, ScaledIdentity(float(a)), x_top=1e6)
        hi = apply_H(LIN, ScaledIdentity(float(b)), x_top=1e6)
        assert np.all(np.asarray(lo(xs)) <= np.asarray(hi(xs)) * (1.0 + 1e-12))


def test_H_rejects_non_monotone_and_bounded_arguments():
    nodes = geometric_nodes(1e-2, 1e4, 8)
    with pytest.raises(ValueError, match="strictly increasing"):
        apply_H(LIN, GridFn(nodes, nodes[::-1].copy()), x_top=1e4)
    bounded = GridFn(nodes, 5.0 * nodes / (1.0 + nodes),
                     hi_tail=Tail("constant", (5.0,)))
    with pytest.raises(ValueError, match="bounded"):
        apply_H(LIN, bounded, x_top=1e4)
    with pytest.raises(TypeError):
        apply_H(LIN, lambda x: x, x_top=1e4)


def test_G_rejects_negative_values():
    with pytest.raises(ValueError, match="non-negative"):
        apply_G(LIN, lambda u: np.asarray(u) - 1e9, u_top=1e10)


# ---------------------------------------------------------------------------
# iterate families
# ---------------------------------------------------------------------------

def test_conjugate_iterates_linear_closed_form():
    # h_2(u) = u/2; h_3(u) = int_0^u e^{t/2}/(1+e^t) dt = 2 atan(e^{u/2}) - pi/2
    fam = conjugate_iterate(LIN, 0.5, u_top=1e12)
    assert np.array_equal(np.asarray(fam.iterates[0].values),
                          0.5 * np.asarray(fam.iterates[0].nodes))
    us = np.geomspace(0.01, 30.0, 200)
    closed = 2.0 * np.arctan(np.exp(us / 2.0)) - math.pi / 2.0
    rel = np.abs(np.asarray(fam.iterates[1](us)) / closed - 1.0)
    assert np.max(rel) < 5e-6
    assert [t.verdict for t in fam.verdicts] == ["unbounded", "bounded"]
    assert fam.j_eta == 3


def test_phi_family_linear_closed_form():
    # Phi_3(x) = exp(2 atan(1+x) - pi/2) - 1, bounded by e^{pi/2} - 1
    fam = phi_family(LIN, 0.5)
    assert [t.verdict for t in fam.verdicts] == ["unbounded", "unbounded", "bounded"]
    assert fam.j_eta == 3
    phi3 = fam.iterates[2]
    xs = np.geomspace(0.01, 50.0, 200)
    closed = np.exp(2.0 * np.arctan(1.0 + xs) - math.pi / 2.0) - 1.0
    assert np.max(np.abs(np.asarray(phi3(xs)) / closed - 1.0)) < 5e-6
    limit = math.exp(math.pi / 2.0) - 1.0
    assert float(phi3.values[-1]) == pytest.approx(limit, rel=1e-6)


def test_phi_family_sublinear_needs_one_more_iterate():
    fam = phi_family(PL6, 0.5)
    assert [t.verdict for t in fam.verdicts] == [
        "unbounded", "unbounded", "unbounded", "bounded"]
    assert fam.j_eta == 4


@pytest.mark.parametrize("bad_eta", [0.0, 1.0, -0.2])
def test_phi_family_rejects_eta_outside_unit_interval(bad_eta):
    with pytest.raises(ValueError, match="eta"):
        phi_family(LIN, bad_eta)


def test_conjugate_iterate_rejects_tiny_budget():
    with pytest.raises(ValueError, match="j_max"):
        conjugate_iterate(LIN, 0.5, j_max=2)


@pytest.mark.parametrize(
    "spec,eta,expect",
    [(LIN, 0.5, 2), (PL6, 0.45, 3), (PL6, 0.5, 3), (PL6, 0.55, 3), (PL4, 0.5, 2)],
    ids=["lin", "pl6@45", "pl6@50", "pl6@55", "pl4"],
)
def test_g_sequence_first_bounded_index(spec, eta, expect):
    gs = g_sequence(spec, eta)
    assert gs.i_eta == expect
    assert gs.verdicts[-1].verdict == "bounded"
    assert all(t.verdict == "unbounded" for t in gs.verdicts[:-1])


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def test_classify_tail_three_verdicts():
    nodes = geometric_nodes(1e-2, 1e10, 16)
    unbounded = GridFn(nodes, nodes, hi_tail=Tail("powerfit", (1e10, 1e10, 1.0)))
    assert classify_tail(unbounded).verdict == "unbounded"
    bounded = GridFn(nodes, 5.0 * nodes / (1.0 + nodes),
                     hi_tail=Tail("constant", (5.0,)))
    assert classify_tail(bounded).verdict == "bounded"
    slow = GridFn(nodes, nodes ** 0.06,
                  hi_tail=Tail("powerfit", (1e10, 1e10 ** 0.06, 0.06)))
    tc = classify_tail(slow)
    assert tc.verdict == "undetermined"
    assert tc.fitted_exponent == pytest.approx(0.06, abs=0.01)


# ---------------------------------------------------------------------------
# index reports
# ---------------------------------------------------------------------------

def test_index_sweep_linear():
    rep = index_sweep(LIN, [0.45, 0.5, 0.55])
    assert rep.i_values == [2, 2, 2]
    assert rep.j_values == [3, 3, 3]
    assert (rep.i_minus, rep.i_plus, rep.j_minus, rep.j_plus) == (2, 2, 3, 3)


def test_index_report_json_shape():
    rep = index_sweep(LIN, [0.5])
    d = rep.to_json_dict()
    assert set(d) == {"family", "params", "eta", "i", "j",
                      "i_minus", "i_plus", "j_minus", "j_plus", "evidence"}
    assert d["family"] == "linear"
    assert d["i"] == [2]


def test_index_limits_critical_weight_is_infinite():
    rep = index_limits(critical_weight())
    assert rep.i_minus is None and rep.i_plus is None
    assert rep.j_minus is None and rep.j_plus is None
    d = rep.to_json_dict()
    assert set(d["i"]) == {"inf"}
    assert d["i_plus"] == "inf"


# ---------------------------------------------------------------------------
# epsilon selection
# ---------------------------------------------------------------------------

def test_choose_epsilon_linear():
    ch = choose_epsilon(LIN)
    assert ch.epsilon == 0.125
    assert ch.index_at_eta == ch.i_plus == 2
    assert ch.eta == pytest.approx(1.0 - ch.epsilon)
    assert ch.tried == [(0.125, 2)]


def test_choose_epsilon_sublinear():
    ch = choose_epsilon(PL6)
    assert ch.epsilon == 0.125
    assert ch.index_at_eta == ch.i_plus == 3


def test_choose_epsilon_critical_is_honest():
    with pytest.raises(ValueError, match="infinite"):
        choose_epsilon(critical_weight())


# ---------------------------------------------------------------------------
# growth sandwich
# ---------------------------------------------------------------------------

def test_sandwich_subcritical_pair():
    rep = growth_sandwich_check(PL6, 0.5, 2)
    assert rep.alpha == 0.6
    assert rep.predicted_exponent == pytest.approx((2 - 1) * (1 / 0.6 - 1))
    assert rep.rel_error < 0.01
    assert not rep.supercritical
    assert rep.fit_error is None


def test_sandwich_shallow_exponent():
    rep = growth_sandwich_check(polylog_weight(0.75), 0.5, 2)
    assert rep.predicted_exponent == pytest.approx(1.0 / 3.0)
    assert rep.rel_error < 0.05


def test_sandwich_supercritical_branch():
    rep = growth_sandwich_check(PL6, 0.9, 3, u_top=1e24)
    assert rep.supercritical
    assert rep.predicted_exponent == pytest.approx(4.0 / 3.0)
    assert rep.rel_error < 0.05


# ---------------------------------------------------------------------------
# local-time profile and envelope
# ---------------------------------------------------------------------------

def test_psi_profile_first_entry_is_quarter_identity():
    ps = psi_profile(LIN, 2)
    assert len(ps) == 2
    assert isinstance(ps[0], ScaledIdentity)
    assert ps[0].scale == 0.25
    assert ps[0](8.0) == 2.0
    xs = np.geomspace(0.1, 1e3, 50)
    second = np.asarray(ps[1](xs))
    assert np.all(second >= 0)
    assert np.all(np.diff(second) > 0)
    # each profile level sits below the previous one for large arguments
    assert float(ps[1](1e3)) < float(ps[0](1e3))


def test_build_f_eta_sublinear_envelope():
    fe = build_f_eta(PL6, 0.54, x_top=1e34)
    assert not fe.used_fallback
    assert fe.checks["dominates_phi2"] is True
    assert fe.checks["gap_increasing"] is True
    assert fe.checks["gap_top_exceeds_mid"] is True
    assert float(fe.f(0.0)) == 0.0
    assert float(fe.f(1.0)) == pytest.approx(1.348827388387061, rel=1e-12)
    assert float(fe.f(2.0)) == pytest.approx(2.41911524385764, rel=1e-12)
    assert float(fe.f(100.0)) == pytest.approx(51.03741457643252, rel=1e-9)
    # sub-linear envelope: grows, but slower than the identity at the top
    assert float(fe.f(100.0)) < 100.0


def test_build_f_eta_rejects_eta_at_or_below_half():
    with pytest.raises(ValueError, match="eta"):
        build_f_eta(PL6, 0.5)


def test_build_f_eta_linear_aborts_honestly():
    # the linear family admits no envelope with a slowly-varying gap; the
    # builder must refuse rather than hand back a useless one
    with pytest.raises(ValueError, match="no admissible envelope"):
        build_f_eta(LIN, 0.54)
