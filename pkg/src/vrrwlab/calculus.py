"""Primitives of 1/w, their inverses, and the conjugate axis.

``W(x) = int_0^x du/w(u)`` is the scale function of the whole laboratory: for
sub-linear regularly varying ``w`` it grows without bound but its inverse
grows super-exponentially, so almost every operator computation is done in
the coordinate ``u = W(x)``.  Three constructions live here:

* ``compute_W`` / ``invert_W``: W on a geometric grid with exact nodal
  derivatives 1/w, and its inverse as a first-class object;
* ``compute_W_psi``: perturbed primitives ``int_0^x du / w(u + psi(u))``;
* ``extend_W_log`` / ``ConjugateAxis``: W continued in L = log x coordinates
  far beyond the direct hull, so that ``w(W^{-1}(u))`` can be evaluated for
  u up to ~1e12 even though ``W^{-1}(u)`` itself overflows any float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import (
    GridFn,
    Tail,
    cell_integrals,
    fit_loglinear_tail,
    fit_power_tail,
    geometric_nodes,
)
from .weights import WeightSpec, eval_ell_log, eval_w, eval_w_log, stitch_points

__all__ = [
    "compute_W",
    "invert_W",
    "InverseFn",
    "compute_W_psi",
    "extend_W_log",
    "ConjugateAxis",
    "conjugate_axis",
]

DEFAULT_X_MAX = 1e12
DEFAULT_NODES_PER_DECADE = 48
DEFAULT_X_ANCHOR = 1e-3
DEFAULT_REL_TOL = 1e-10


def _cumulative(cells: np.ndarray) -> np.ndarray:
    # sequential prefix sum; with geometric spacing this reproduces exact
    # node positions when every cell integral equals the cell width
    return np.cumsum(cells)


def compute_W(spec: WeightSpec, x_max: float = DEFAULT_X_MAX,
              nodes_per_decade: int = DEFAULT_NODES_PER_DECADE,
              x_anchor: float = DEFAULT_X_ANCHOR,
              rel_tol: float = DEFAULT_REL_TOL) -> GridFn:
    """Build W(x) = int_0^x du/w(u) on a geometric grid.

    Nodal derivatives are the exact 1/w(node), the low tail is a power fit
    through the origin, and the high tail is linear in log x with the slope
    fit over the top half-decade (that slope is ~ell(x_top)).
    """
    if x_max < 1e3:
        raise ValueError("x_max must be at least 1e3")
    if nodes_per_decade < 16:
        raise ValueError("nodes_per_decade must be at least 16")
    nodes = geometric_nodes(x_anchor, x_max, nodes_per_decade,
                            include=stitch_points(spec))
    edges = np.concatenate([[0.0], nodes])
    cells = cell_integrals(lambda u: 1.0 / np.asarray(eval_w(spec, u)), edges,
                           rel_tol=rel_tol)
    values = _cumulative(cells)
    derivs = 1.0 / np.asarray(eval_w(spec, nodes))
    return GridFn(nodes, values, derivs,
                  lo_tail=fit_power_tail(nodes, values, "lo"),
                  hi_tail=fit_loglinear_tail(nodes, values))


@dataclass
class InverseFn:
    """Inverse of a strictly increasing GridFn, sharing its tables.

    Calling solves the forward interpolant (no accuracy lost to a second
    interpolation); ``.inverse`` evaluates the forward function, so round
    trips compose to the identity within solver tolerance.
    """

    forward: GridFn

    def __call__(self, y):
        return self.forward.inverse(y)

    def inverse(self, x):
        return self.forward(x)

    @property
    def hull(self) -> tuple[float, float]:
        return float(self.forward.values[0]), float(self.forward.values[-1])


def invert_W(w_grid: GridFn) -> InverseFn:
    if not w_grid.is_increasing:
        raise ValueError("cannot invert: grid values are not strictly increasing")
    return InverseFn(w_grid)


def compute_W_psi(spec: WeightSpec, psi, x_max: float = DEFAULT_X_MAX,
                  nodes_per_decade: int = DEFAULT_NODES_PER_DECADE,
                  x_anchor: float = DEFAULT_X_ANCHOR,
                  rel_tol: float = DEFAULT_REL_TOL) -> GridFn:
    """Perturbed primitive W_psi(x) = int_0^x du / w(u + psi(u)), psi >= 0.

    With psi identically zero this reproduces compute_W bitwise (same grid,
    same quadrature path).
    """
    nodes = geometric_nodes(x_anchor, x_max, nodes_per_decade,
                            include=stitch_points(spec))
    probe = np.asarray(psi(nodes), dtype=np.float64)
    if probe.shape != nodes.shape:
        raise ValueError("psi must be vectorized over its argument")
    if np.any(probe < 0):
        i = int(np.argmax(probe < 0))
        raise ValueError(f"psi must be non-negative; psi({nodes[i]!r}) = {probe[i]!r}")

    def integrand(u):
        u = np.asarray(u, dtype=np.float64)
        return 1.0 / np.asarray(eval_w(spec, u + np.asarray(psi(u), dtype=np.float64)))

    edges = np.concatenate([[0.0], nodes])
    cells = cell_integrals(integrand, edges, rel_tol=rel_tol)
    values = _cumulative(cells)
    derivs = integrand(nodes)
    return GridFn(nodes, values, derivs,
                  lo_tail=fit_power_tail(nodes, values, "lo"),
                  hi_tail=fit_loglinear_tail(nodes, values))


# ---------------------------------------------------------------------------
# log-domain continuation
# ---------------------------------------------------------------------------

def extend_W_log(spec: WeightSpec, w_grid: GridFn, u_top: float = 1.25e12,
                 nodes_per_decade: int = 32,
                 rel_tol: float = DEFAULT_REL_TOL,
                 defect_tol: float = 1e-8) -> GridFn:
    """Continue W past the direct hull, as log W(e^L) on a refined L-grid.

    Starting from L0 = log(x_top) with W(e^{L0}) anchored to the direct grid,
    cells of ``int exp(log ell(e^l)) dl`` are accumulated and the L-range is
    grown geometrically until W reaches ``u_top``.  A geometric L-grid is far
    too coarse where log W curves (for polylog weights the whole continuation
    spans less than a decade of L), so cells are then bisected until the
    interpolant reproduces independently integrated midpoint values within
    ``defect_tol`` — this bounds the error of the inverse V(u) used by every
    conjugate-coordinate integrand.  Nodal derivatives
    d(log W)/dL = ell(e^L)/W(e^L) are exact given the accumulated values.
    """
    if spec.family == "table":
        raise ValueError("tabulated weights cannot be continued beyond their hull")
    L0 = math.log(w_grid.nodes[-1])
    W0 = float(w_grid.values[-1])
    target = math.log(u_top)

    def integrand(L):
        return np.exp(np.asarray(eval_ell_log(spec, np.asarray(L, dtype=np.float64))))

    def accumulate(nodes):
        cells = cell_integrals(integrand, nodes, rel_tol=rel_tol)
        return W0 + np.concatenate([[0.0], np.cumsum(cells)])

    L_top = 2.0 * L0
    for _ in range(48):
        nodes = geometric_nodes(L0, L_top, nodes_per_decade)
        w_vals = accumulate(nodes)
        if math.log(w_vals[-1]) >= target:
            stop = int(np.searchsorted(np.log(w_vals), target)) + 1
            stop = min(max(stop + 1, 4), nodes.size)
            nodes, w_vals = nodes[:stop], w_vals[:stop]
            break
        if w_vals[-1] - W0 <= W0 * 1e-9:
            raise ValueError(
                f"W is bounded for weight {spec.label!r} (stalled near {w_vals[-1]:g}); "
                "no conjugate axis exists — is the weight super-linear?"
            )
        L_top *= 4.0
    else:
        raise ValueError(
            f"could not continue W to u_top={u_top:g} for weight {spec.label!r} "
            f"(reached only {w_vals[-1]:g})"
        )

    def assemble(nodes, w_vals):
        log_w = np.log(w_vals)
        derivs = np.exp(np.asarray(eval_ell_log(spec, nodes)) - log_w)
        return GridFn(nodes, log_w, derivs, lo_tail=None, hi_tail=None)

    for _ in range(12):
        fn = assemble(nodes, w_vals)
        mids = 0.5 * (nodes[:-1] + nodes[1:])
        half = cell_integrals(integrand, np.sort(np.concatenate([nodes, mids])),
                              rel_tol=rel_tol)
        w_mid = W0 + np.cumsum(half)[0::2]  # cumulative value at each midpoint
        defect = np.abs(np.asarray(fn(mids)) - np.log(w_mid))
        wide = (nodes[1:] - nodes[:-1]) > 1e-9 * np.abs(mids)
        bad = (defect > defect_tol) & wide
        if not np.any(bad):
            return fn
        nodes = np.sort(np.concatenate([nodes, mids[bad]]))
        w_vals = accumulate(nodes)
    return assemble(nodes, w_vals)


@dataclass
class ConjugateAxis:
    """Evaluate V(u) = log W^{-1}(u) and log w(W^{-1}(u)) for u in [0, u_top].

    Below the direct hull's image the inverse is solved on the x-grid; above
    it the log-domain continuation is inverted in (L, log W) coordinates.
    """

    spec: WeightSpec
    w_grid: GridFn
    w_log_grid: GridFn
    u_split: float

    def V(self, u):
        arr = np.asarray(u, dtype=np.float64)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        if np.any(arr < 0):
            raise ValueError("conjugate coordinate u must be non-negative")
        out = np.empty_like(arr)
        low = arr <= self.u_split
        if np.any(low):
            x = np.asarray(self.w_grid.inverse(arr[low]))
            with np.errstate(divide="ignore"):
                out[low] = np.where(x > 0.0, np.log(np.maximum(x, 5e-324)), -np.inf)
        high = ~low
        if np.any(high):
            uh = arr[high]
            if np.any(uh > math.exp(self.w_log_grid.values[-1])):
                raise ValueError(
                    f"u beyond the continued hull (max {math.exp(self.w_log_grid.values[-1]):g})"
                )
            out[high] = self.w_log_grid.inverse(np.log(uh))
        return float(out[0]) if scalar else out.reshape(np.shape(u))

    def omega_log(self, u, shift: float = 0.0):
        """log w(e^shift * W^{-1}(u)); shift lets callers scale the inverse."""
        v = np.asarray(self.V(u))
        return eval_w_log(self.spec, v + shift)


def conjugate_axis(spec: WeightSpec, u_top: float = 1e12,
                   w_grid: GridFn | None = None, **kw) -> ConjugateAxis:
    if w_grid is None:
        w_grid = compute_W(spec, **kw)
    w_log_grid = extend_W_log(spec, w_grid, u_top=1.25 * u_top)
    return ConjugateAxis(spec, w_grid, w_log_grid, u_split=float(w_grid.values[-1]))
