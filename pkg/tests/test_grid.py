"""Monotone grid interpolants, tails, quadrature, persistence."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vrrwlab.grid import (
    GridFn,
    ScaledIdentity,
    Tail,
    cell_integrals,
    cumulative_integral,
    fit_loglinear_tail,
    fit_power_tail,
    geometric_nodes,
    load_gridfn,
    save_gridfn,
)


@pytest.fixture()
def square_fn():
    nodes = geometric_nodes(1e-3, 1e3, 8)
    return GridFn(nodes, nodes ** 2)


# ---------------------------------------------------------------------------
# nodes
# ---------------------------------------------------------------------------

def test_geometric_nodes_shape_and_ends():
    nodes = geometric_nodes(1e-2, 1e2, 12)
    assert nodes[0] == 1e-2
    assert nodes[-1] == 1e2
    assert np.all(np.diff(nodes) > 0)
    ratios = nodes[1:] / nodes[:-1]
    assert np.max(np.abs(ratios / ratios[0] - 1.0)) < 1e-9


def test_geometric_nodes_include_inserts_exactly():
    nodes = geometric_nodes(1.0, 100.0, 8, include=(7.7,))
    assert 7.7 in nodes
    assert np.all(np.diff(nodes) > 0)


def test_geometric_nodes_rejects_sparse_grid():
    with pytest.raises(ValueError):
        geometric_nodes(1.0, 100.0, 3)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def test_node_values_are_exact(square_fn):
    nodes = square_fn.nodes
    assert np.array_equal(np.asarray(square_fn(nodes)), nodes ** 2)


def test_interior_accuracy_improves_with_density():
    # third-order interpolation: each halving of the log-spacing should cut the
    # relative error by roughly 8x; check the default working density too
    xs = np.geomspace(2e-3, 9e2, 257)
    errs = []
    for per_decade in (8, 16, 48):
        nodes = geometric_nodes(1e-3, 1e3, per_decade)
        fn = GridFn(nodes, nodes ** 2)
        errs.append(np.max(np.abs(np.asarray(fn(xs)) / xs ** 2 - 1.0)))
    assert errs[0] > 4.0 * errs[1] > 16.0 * errs[2]
    assert errs[2] < 1e-5


def test_outside_hull_without_tail_raises(square_fn):
    with pytest.raises(ValueError):
        square_fn(1e4)
    with pytest.raises(ValueError):
        square_fn(1e-4)


def test_hull_property(square_fn):
    assert square_fn.hull == (1e-3, 1e3)
    assert square_fn.is_increasing


def test_tails_extend_evaluation():
    nodes = geometric_nodes(1e-3, 1e3, 8)
    fn = GridFn(
        nodes,
        nodes ** 2,
        lo_tail=Tail("constant", (1e-6,)),
        hi_tail=Tail("powerfit", (1e3, 1e6, 2.0)),
    )
    assert fn(1e4) == pytest.approx(1e8, rel=1e-12)
    assert fn(1e-5) == 1e-6


def test_unknown_tail_kind_rejected():
    with pytest.raises(ValueError):
        Tail("spline", (1.0,))


# ---------------------------------------------------------------------------
# inverse
# ---------------------------------------------------------------------------

def test_inverse_round_trip(square_fn):
    xs = np.geomspace(2e-3, 9e2, 101)
    back = np.array([square_fn.inverse(float(square_fn(x))) for x in xs])
    assert np.max(np.abs(back / xs - 1.0)) < 1e-9


@given(st.floats(min_value=-2.5, max_value=2.5))
@settings(max_examples=100, deadline=None)
def test_inverse_round_trip_hypothesis(log10x):
    nodes = geometric_nodes(1e-3, 1e3, 16)
    fn = GridFn(nodes, np.log1p(nodes))
    x = 10.0 ** log10x
    assert fn.inverse(float(fn(x))) == pytest.approx(x, rel=1e-9)


def test_inverse_requires_increasing_values():
    nodes = geometric_nodes(1.0, 10.0, 8)
    flat = GridFn(nodes, np.ones_like(nodes))
    with pytest.raises(ValueError):
        flat.inverse(1.0)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def test_cell_integrals_polynomial_exactness():
    edges = np.array([0.0, 1.0, 2.0, 5.0])
    cells = cell_integrals(lambda x: 3.0 * x ** 2, edges)
    assert np.allclose(cells, [1.0, 7.0, 117.0], rtol=1e-12)


def test_cumulative_integral_identity():
    nodes = np.linspace(0.5, 4.0, 15)
    cum = cumulative_integral(lambda x: x, nodes, from_zero=True)
    assert np.allclose(cum, nodes ** 2 / 2.0, rtol=1e-12)


def test_cumulative_integral_without_zero_leg():
    nodes = np.linspace(1.0, 3.0, 9)
    cum = cumulative_integral(lambda x: np.ones_like(x), nodes, from_zero=False)
    assert cum[0] == 0.0
    assert np.allclose(cum, nodes - 1.0, rtol=1e-12)


# ---------------------------------------------------------------------------
# tail fitting
# ---------------------------------------------------------------------------

def test_fit_power_tail_recovers_exponent():
    xs = np.geomspace(10.0, 100.0, 20)
    tail = fit_power_tail(xs, 3.0 * xs ** 1.5, side="hi")
    assert tail(200.0) == pytest.approx(3.0 * 200.0 ** 1.5, rel=1e-6)


def test_fit_loglinear_tail_recovers_slope():
    xs = np.geomspace(10.0, 100.0, 20)
    tail = fit_loglinear_tail(xs, 2.0 + 0.5 * np.log(xs))
    assert tail(1000.0) == pytest.approx(2.0 + 0.5 * np.log(1000.0), rel=1e-9)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def test_save_load_bit_exact(tmp_path):
    nodes = geometric_nodes(1e-3, 1e3, 8)
    fn = GridFn(
        nodes,
        np.sqrt(nodes),
        hi_tail=Tail("powerfit", (1e3, np.sqrt(1e3), 0.5)),
    )
    csv_path, json_path = save_gridfn(fn, tmp_path / "fn")
    assert csv_path.exists() and json_path.exists()
    back = load_gridfn(tmp_path / "fn")
    xs = np.geomspace(2e-3, 9e4, 300)
    assert np.array_equal(np.asarray(fn(xs)), np.asarray(back(xs)))
    assert back.hull == fn.hull


def test_load_missing_raises(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_gridfn(tmp_path / "absent")


# ---------------------------------------------------------------------------
# scaled identity
# ---------------------------------------------------------------------------

def test_scaled_identity_eval_and_inverse():
    si = ScaledIdentity(0.25)
    assert si(8.0) == 2.0
    assert si.inverse(2.0) == 8.0
    assert si(np.array([4.0, 12.0])).tolist() == [1.0, 3.0]


def test_scaled_identity_rejects_nonpositive_scale():
    with pytest.raises(ValueError):
        ScaledIdentity(0.0)
