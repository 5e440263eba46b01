"""Integrated reciprocal-weight primitive, its inverse and log continuation."""
from __future__ import annotations

import math

import numpy as np
import pytest

from vrrwlab.calculus import (
    compute_W,
    compute_W_psi,
    conjugate_axis,
    extend_W_log,
    invert_W,
)
from vrrwlab.weights import linear_weight, polylog_weight


@pytest.fixture(scope="module")
def w_lin():
    return compute_W(linear_weight(1.0), 1e6)


@pytest.fixture(scope="module")
def axis_lin():
    return conjugate_axis(linear_weight(1.0), u_top=20.0)


# ---------------------------------------------------------------------------
# the primitive itself (linear weight has the closed form log(1+x))
# ---------------------------------------------------------------------------

def test_primitive_starts_at_zero(w_lin):
    assert float(w_lin(0.0)) == 0.0


def test_primitive_log2(w_lin):
    assert float(w_lin(1.0)) == pytest.approx(math.log(2.0), rel=1e-11)


def test_primitive_hits_one_at_e_minus_one(w_lin):
    assert float(w_lin(math.e - 1.0)) == pytest.approx(1.0, rel=1e-7)


def test_primitive_closed_form_everywhere(w_lin):
    xs = np.geomspace(1e-2, 9e5, 200)
    rel = np.abs(np.asarray(w_lin(xs)) / np.log1p(xs) - 1.0)
    assert np.max(rel) < 1e-7


def test_primitive_polylog_monotone():
    fn = compute_W(polylog_weight(0.6), 1e9)
    xs = np.geomspace(1e-2, 9e8, 300)
    vals = np.asarray(fn(xs))
    assert np.all(np.diff(vals) > 0)
    # sub-linear weight: primitive grows faster than for the linear family
    assert float(fn(1e8)) > math.log(1e8)


# ---------------------------------------------------------------------------
# inversion
# ---------------------------------------------------------------------------

def test_inverse_round_trip(w_lin):
    inv = invert_W(w_lin)
    xs = np.geomspace(1e-2, 9e5, 100)
    back = np.array([float(inv(float(w_lin(x)))) for x in xs])
    assert np.max(np.abs(back / xs - 1.0)) < 1e-12


def test_inverse_closed_form(w_lin):
    inv = invert_W(w_lin)
    assert float(inv(1.0)) == pytest.approx(math.e - 1.0, rel=1e-7)
    assert inv.hull[1] == pytest.approx(math.log(1.0 + 1e6), rel=1e-6)


# ---------------------------------------------------------------------------
# perturbed primitive
# ---------------------------------------------------------------------------

def test_zero_perturbation_is_bitwise(w_lin):
    fn = compute_W_psi(
        linear_weight(1.0),
        lambda u: np.zeros_like(np.asarray(u, dtype=float)),
        1e6,
    )
    xs = np.geomspace(1e-2, 9e5, 100)
    assert np.array_equal(np.asarray(fn(xs)), np.asarray(w_lin(xs)))


def test_identity_perturbation_closed_form():
    # shifting the argument by psi(u) = u doubles the slope inside the weight:
    # int_0^x du/(1 + 2u) = log(1 + 2x)/2
    fn = compute_W_psi(linear_weight(1.0), lambda u: np.asarray(u, dtype=float), 1e6)
    xs = np.geomspace(1e-2, 9e5, 120)
    rel = np.abs(np.asarray(fn(xs)) / (0.5 * np.log1p(2.0 * xs)) - 1.0)
    assert np.max(rel) < 5e-7


def test_negative_perturbation_rejected():
    with pytest.raises(ValueError):
        compute_W_psi(
            linear_weight(1.0),
            lambda u: -np.ones_like(np.asarray(u, dtype=float)),
            1e4,
        )


def test_perturbation_only_lowers(w_lin):
    fn = compute_W_psi(
        linear_weight(1.0),
        lambda u: 0.02 * np.asarray(u, dtype=float),
        1e6,
    )
    xs = np.geomspace(1e-2, 9e5, 100)
    assert np.all(np.asarray(fn(xs)) <= np.asarray(w_lin(xs)) + 1e-15)


def test_linear_rescaling_perturbation_is_asymptotically_neutral(w_lin):
    # psi(u) = eps*u rescales the argument; (1+eps) * W_psi tracks W to O(eps/log x)
    eps = 0.02
    fn = compute_W_psi(
        linear_weight(1.0),
        lambda u: eps * np.asarray(u, dtype=float),
        1e6,
    )
    ratio = (1.0 + eps) * float(fn(1e5)) / float(w_lin(1e5))
    assert abs(ratio - 1.0) < 0.01


# ---------------------------------------------------------------------------
# log-domain continuation and the conjugate axis
# ---------------------------------------------------------------------------

def test_continuation_anchors_to_direct_grid(w_lin):
    cont = extend_W_log(linear_weight(1.0), w_lin, u_top=1e3)
    l0 = cont.nodes[0]
    assert math.exp(l0) == pytest.approx(1e6, rel=1e-12)
    assert float(cont(l0)) == pytest.approx(math.log(float(w_lin(1e6))), rel=1e-12)


def test_axis_low_branch_closed_form(axis_lin):
    # V(u) = log(W^{-1}(u)) = log(e^u - 1) for the linear family
    us = np.linspace(0.5, 12.0, 40)
    vals = np.array([float(axis_lin.V(u)) for u in us])
    assert np.max(np.abs(vals - np.log(np.expm1(us)))) < 1e-6


def test_axis_high_branch_closed_form(axis_lin):
    # u_top=20 puts the continued branch above u_split ~ 27.6; same closed form
    assert axis_lin.u_split > 20.0
    us = np.linspace(axis_lin.u_split + 0.5, 33.5, 20)
    vals = np.array([float(axis_lin.V(u)) for u in us])
    assert np.max(np.abs(vals - np.log(np.expm1(us)))) < 1e-6


def test_axis_is_continuous_at_the_split(axis_lin):
    eps = 1e-9
    lo = axis_lin.V(axis_lin.u_split - eps)
    hi = axis_lin.V(axis_lin.u_split + eps)
    assert abs(hi - lo) < 1e-6


def test_axis_origin_and_domain(axis_lin):
    assert axis_lin.V(0.0) == -math.inf
    with pytest.raises(ValueError):
        axis_lin.V(-1.0)
    with pytest.raises(ValueError):
        axis_lin.V(1e9)


def test_axis_log_weight_closed_form(axis_lin):
    # log w(W^{-1}(u)) = log(1 + (e^u - 1)) = u for the linear family
    us = np.linspace(0.5, 12.0, 40)
    vals = np.array([float(axis_lin.omega_log(u)) for u in us])
    assert np.max(np.abs(vals - us)) < 1e-6


def test_axis_log_weight_shift(axis_lin):
    # shift = log 2 doubles the inverse: log w(2(e^u - 1)) = log(2 e^u - 1)
    sh = math.log(2.0)
    us = np.linspace(0.5, 12.0, 40)
    vals = np.array([float(axis_lin.omega_log(u, shift=sh)) for u in us])
    assert np.max(np.abs(vals - np.log(2.0 * np.exp(us) - 1.0))) < 1e-6


def test_axis_reaches_deep_coordinates_for_sublinear_weights():
    axis = conjugate_axis(polylog_weight(0.6), u_top=1e18,
                          w_grid=compute_W(polylog_weight(0.6), 1e9))
    v = axis.V(1e18)
    assert 400.0 < v < 500.0  # far beyond the direct hull (log 1e9 ~ 20.7)
