"""Iterated integral operators and localization-index classification.

Two families of iterates drive the analysis of how many sites a reinforced
walk can occupy.  Both live naturally in the conjugate coordinate u = W(x):

* ``g``-iterates: ``G(f)(x) = int_0^x w(W^{-1}(f(u))) / w(W^{-1}(u)) du``,
  started from ``eta * Id``.  The lower index ``i_eta`` is the first k >= 2
  whose iterate is bounded.
* ``h``-iterates (conjugates of the direct maps below):
  ``h_{j+1}(x) = eta * int_0^x w(W^{-1}(h_j(u))) / w(eta * W^{-1}(u)) du``
  with ``h_2 = eta * Id``.  The upper index ``j_eta`` is the first bounded
  one, and satisfies ``j = i + 1`` wherever the maps vary continuously.

The direct maps act on the original axis:
``H(f)(x) = W^{-1}( int_0^x du / w(f^{-1}(u)) )``, iterated from ``eta*Id``;
the j-th direct iterate is bounded exactly when its conjugate ``h_j`` is,
which is what ``phi_family`` cross-checks against ``conjugate_iterate``.

Boundedness of a numerically constructed iterate is decided by
``classify_tail``: a saturation ratio f(X)/f(sqrt(X)) plus a log-log slope
over the top two grid decades, with an explicit Undetermined verdict between
the thresholds — near the parameter values where the index jumps, no finite
hull can decide, and the classifier says so rather than guessing.

Index *reports* (``index_sweep``/``index_limits``) do not trust plain-hull
verdicts: some phases only separate at depths no float-valued iterate can
express (the critical weight needs u beyond e^(1e10) before its late
iterates visibly grow again), so the sweeps re-run the same iterations on
the log-domain axis (``deepaxis``) and use those verdicts as the authority —
see ``deep_index_probe``.  The plain-axis sequences remain the value oracles
and agree with the probe wherever both can see the answer.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .calculus import (
    ConjugateAxis,
    InverseFn,
    compute_W,
    compute_W_psi,
    conjugate_axis,
    invert_W,
)
from .deepaxis import DEFAULT_M_TOP, deep_index_probe, deep_sandwich_fit
from .grid import (
    GridFn,
    ScaledIdentity,
    cell_integrals,
    fit_power_tail,
    geometric_nodes,
)
from .weights import WeightSpec, eval_ell, eval_w, eval_w_log, stitch_points

__all__ = [
    "TailClass",
    "ClassificationError",
    "classify_tail",
    "apply_G",
    "apply_H",
    "PhiFamily",
    "phi_family",
    "ConjugateFamily",
    "conjugate_iterate",
    "GSequence",
    "g_sequence",
    "IndexReport",
    "index_sweep",
    "index_limits",
    "SandwichReport",
    "growth_sandwich_check",
    "psi_profile",
    "FEta",
    "build_f_eta",
    "EpsilonChoice",
    "choose_epsilon",
]

DEFAULT_X_TOP = 1e12
# The conjugate hull reaches much further than the direct one: u = 1e24 maps
# to astronomically large x, which is what separates the iterate phases for
# alpha close to a band edge (0.72 needs roughly u >= 1e20 to saturate).
DEFAULT_U_TOP = 1e24
X_PER_DECADE = 48
U_PER_DECADE = 32
DEFAULT_TOL_SAT = 0.02
DEFAULT_SLOPE_LO = 0.02
DEFAULT_SLOPE_HI = 0.10
MAX_ITERATES = 8


class ClassificationError(RuntimeError):
    """An iterate could not be classified (verdict undetermined)."""

    def __init__(self, message: str, tail: "TailClass | None" = None):
        super().__init__(message)
        self.tail = tail


@dataclass(frozen=True)
class TailClass:
    """Boundedness verdict for a function given on a geometric grid."""

    verdict: str  # "bounded" | "unbounded" | "undetermined"
    fitted_exponent: float
    saturation_ratio: float
    fit_window: tuple[float, float]

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "fitted_exponent": self.fitted_exponent,
            "saturation_ratio": self.saturation_ratio,
            "fit_window": list(self.fit_window),
        }


def _classify_values(nodes, values, tol_sat, slope_lo, slope_hi) -> TailClass:
    nodes = np.asarray(nodes, float)
    values = np.asarray(values, float)
    if np.any(values <= 0):
        raise ValueError("tail classification expects positive values")
    X = nodes[-1]
    # saturation: compare against the value at sqrt(X) (interpolated on the grid)
    half = math.sqrt(X)
    j = int(np.searchsorted(nodes, half))
    f_half = values[min(j, values.size - 1)]
    sat = float(values[-1] / f_half)
    window = nodes >= X / 100.0
    slope = float(np.polyfit(np.log(nodes[window]), np.log(values[window]), 1)[0])
    if sat <= 1.0 + tol_sat and slope <= slope_lo:
        verdict = "bounded"
    elif slope >= slope_hi:
        verdict = "unbounded"
    else:
        verdict = "undetermined"
    return TailClass(verdict, slope, sat, (float(nodes[window][0]), float(X)))


def classify_tail(fn, tol_sat: float = DEFAULT_TOL_SAT,
                  slope_lo: float = DEFAULT_SLOPE_LO,
                  slope_hi: float = DEFAULT_SLOPE_HI) -> TailClass:
    """Classify a grid function as bounded / unbounded / undetermined.

    Bounded needs both a flat saturation ratio f(X)/f(sqrt X) and a small
    log-log slope over the top two grid decades; unbounded needs a clearly
    positive slope; anything in between is reported undetermined.
    """
    if not isinstance(fn, GridFn):
        raise TypeError("classify_tail expects a GridFn")
    return _classify_values(fn.nodes, fn.values, tol_sat, slope_lo, slope_hi)


# ---------------------------------------------------------------------------
# workspace: shared grids per weight
# ---------------------------------------------------------------------------

@dataclass
class Workspace:
    spec: WeightSpec
    x_top: float
    u_top: float
    W: GridFn
    Winv: InverseFn
    conj: ConjugateAxis
    x_nodes: np.ndarray
    u_nodes: np.ndarray


@lru_cache(maxsize=16)
def _workspace_cached(spec: WeightSpec, x_top: float, u_top: float) -> Workspace:
    W = compute_W(spec, x_max=x_top)
    conj = conjugate_axis(spec, u_top=u_top, w_grid=W)
    u_breaks = [float(W(s)) for s in stitch_points(spec)]
    u_breaks.append(float(W.values[-1]))  # hand-off between direct and continued inverse
    u_nodes = geometric_nodes(1e-3, u_top, U_PER_DECADE, include=u_breaks)
    return Workspace(spec, x_top, u_top, W, invert_W(W), conj, W.nodes, u_nodes)


def workspace(spec: WeightSpec, x_top: float = DEFAULT_X_TOP,
              u_top: float = DEFAULT_U_TOP) -> Workspace:
    if u_top > 1e95:
        raise ValueError(
            "conjugate hulls above 1e95 overflow cubic cell evaluation "
            "(cell width cubed exceeds float range); use deep_index_probe instead")
    return _workspace_cached(spec, float(x_top), float(u_top))


def _log_winv(ws: Workspace, y) -> np.ndarray:
    """log of W^{-1}(y), tolerating y far beyond the direct hull.

    On-hull arguments go through the forward solve; beyond it the log-linear
    continuation of W is inverted analytically, which stays finite (as a log)
    even where W^{-1} itself overflows float range.
    """
    y = np.asarray(y, dtype=np.float64)
    top = float(ws.W.values[-1])
    out = np.empty_like(y)
    hi = y > top
    if np.any(~hi):
        out[~hi] = np.log(np.asarray(ws.Winv(y[~hi])))
    if np.any(hi):
        x_ref, a, b = ws.W.hi_tail.params
        out[hi] = math.log(x_ref) + (y[hi] - a) / b
    return out


def _merged_edges(nodes: np.ndarray, extra) -> np.ndarray:
    """[0] + nodes, with extra interior breakpoints inserted (originals kept)."""
    edges = np.concatenate([[0.0], nodes])
    pts = sorted(p for p in extra if 0.0 < p < nodes[-1])
    for p in pts:
        i = np.searchsorted(edges, p)
        lo = edges[max(i - 1, 0)]
        hi = edges[min(i, edges.size - 1)]
        near = (p - lo) < 1e-9 * max(p, 1e-300) or (hi - p) < 1e-9 * max(p, 1e-300)
        if not near:
            edges = np.insert(edges, i, p)
    return edges


def _cumulative_on_nodes(integrand, nodes, extra_pts, rel_tol=1e-10) -> np.ndarray:
    edges = _merged_edges(nodes, extra_pts)
    cells = cell_integrals(integrand, edges, rel_tol=rel_tol)
    cums = np.cumsum(cells)
    idx = np.searchsorted(edges[1:], nodes)
    return cums[idx]


def _promote_kinks(nodes, vals, evaluate, in_kinks, stitches):
    """Re-evaluate with curvature-kink abscissae promoted to grid nodes.

    ``in_kinks`` are x-positions where the evaluation's inner argument crosses
    a stitch of w; output crossings (vals passing a stitch, which kink the
    outer W^{-1}) are located by linear inversion, accurate enough for node
    placement.  Without this, PCHIP cells straddling a kink cap the
    interpolation error near 1e-5.
    """
    kinks = [p for p in in_kinks if nodes[0] < p < nodes[-1]]
    kinks += [float(np.interp(s, vals, nodes))
              for s in stitches if vals[0] < s < vals[-1]]
    if not kinks:
        return nodes, vals
    nodes = _merged_edges(nodes, kinks)[1:]
    return nodes, evaluate(nodes)


def _inverse_points(f, targets) -> list[float]:
    """Pre-images of kink targets under f, when f exposes an inverse."""
    pts = []
    inv = getattr(f, "inverse", None)
    if inv is None:
        return pts
    for t in targets:
        try:
            pts.append(float(inv(t)))
        except (ValueError, ZeroDivisionError):
            continue
    return pts


# ---------------------------------------------------------------------------
# the two operators
# ---------------------------------------------------------------------------

def apply_G(spec: WeightSpec, f, u_top: float = DEFAULT_U_TOP,
            rel_tol: float = 1e-10) -> GridFn:
    """G(f)(x) = int_0^x w(W^{-1}(f(u))) / w(W^{-1}(u)) du on the conjugate axis.

    ``f`` must be vectorized and non-negative on [0, u_top].  The identity is
    an exact fixed point: with f(u) = u bitwise the integrand is exactly 1 in
    every cell and the cumulative sums reproduce the grid nodes.
    """
    ws = workspace(spec, u_top=u_top)
    conj = ws.conj
    probe = np.asarray(f(ws.u_nodes), dtype=np.float64)
    if probe.shape != ws.u_nodes.shape:
        raise ValueError("f must be vectorized over its argument")
    bad = ~np.isfinite(probe) | (probe < 0)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise ValueError(f"f must be finite and non-negative; f({ws.u_nodes[i]!r}) = {probe[i]!r}")

    def integrand(u):
        u = np.asarray(u, dtype=np.float64)
        fu = np.asarray(f(u), dtype=np.float64)
        return np.exp(np.asarray(conj.omega_log(fu)) - np.asarray(conj.omega_log(u)))

    # kinks of omega sit at u = W(stitch); the numerator inherits them at f^{-1}
    u_breaks = [float(ws.W(s)) for s in stitch_points(spec)]
    extra = list(u_breaks) + _inverse_points(f, u_breaks)
    values = _cumulative_on_nodes(integrand, ws.u_nodes, extra, rel_tol)
    return GridFn(ws.u_nodes, values, integrand(ws.u_nodes),
                  lo_tail=fit_power_tail(ws.u_nodes, values, "lo"),
                  hi_tail=fit_power_tail(ws.u_nodes, values, "hi"))


def apply_H(spec: WeightSpec, f, x_top: float = DEFAULT_X_TOP,
            rel_tol: float = 1e-10) -> GridFn:
    """H(f)(x) = W^{-1}( int_0^x du / w(f^{-1}(u)) ) on the direct axis.

    ``f`` must be strictly increasing and unbounded with an ``inverse``
    (a GridFn with an invertible high tail, or a ScaledIdentity).  The
    identity is a fixed point to full precision: for f = Id the inner
    integral reproduces W's own cells bitwise and W^{-1} hits exact nodes.
    """
    ws = workspace(spec, x_top=x_top)
    if isinstance(f, GridFn):
        if not f.is_increasing:
            raise ValueError("f must be strictly increasing")
        if f.hi_tail is None or f.hi_tail.kind == "constant" or f.hi_tail.params[-1] <= 0:
            raise ValueError("f looks bounded; the half-step operator needs an unbounded f")
    elif not hasattr(f, "inverse"):
        raise TypeError("f must expose an inverse (GridFn or ScaledIdentity)")

    def integrand(u):
        u = np.asarray(u, dtype=np.float64)
        return 1.0 / np.asarray(eval_w(spec, np.asarray(f.inverse(u), dtype=np.float64)))

    stitches = [float(s) for s in stitch_points(spec)]
    extra = [float(f(s)) for s in stitches]
    nodes = ws.x_nodes
    cums = _cumulative_on_nodes(integrand, nodes, extra, rel_tol)
    values = np.asarray(ws.Winv(cums))
    if np.any(np.diff(values) <= 0):
        raise ValueError("half-step image lost strict monotonicity (degenerate f?)")
    # The image is C^1 but has curvature kinks where the integrand's argument
    # or the image itself crosses a stitch of w; cells straddling those points
    # cap interpolation accuracy near 1e-5, so promote them to grid nodes.
    kinks = [p for p in extra if nodes[0] < p < nodes[-1]]
    kinks += [float(np.interp(s, values, nodes))
              for s in stitches if values[0] < s < values[-1]]
    if kinks:
        nodes = _merged_edges(nodes, kinks)[1:]
        cums = _cumulative_on_nodes(integrand, nodes, extra, rel_tol)
        values = np.asarray(ws.Winv(cums))
        if np.any(np.diff(values) <= 0):
            raise ValueError("half-step image lost strict monotonicity (degenerate f?)")
    derivs = np.asarray(eval_w(spec, values)) * integrand(nodes)
    return GridFn(nodes, values, derivs,
                  lo_tail=fit_power_tail(nodes, values, "lo"),
                  hi_tail=fit_power_tail(nodes, values, "hi"))


# ---------------------------------------------------------------------------
# iterate families
# ---------------------------------------------------------------------------

def _scaled_identity_gridfn(eta: float, nodes: np.ndarray) -> GridFn:
    vals = eta * nodes
    return GridFn(nodes, vals, np.full(nodes.shape, eta),
                  lo_tail=fit_power_tail(nodes, vals, "lo"),
                  hi_tail=fit_power_tail(nodes, vals, "hi"))


@dataclass
class PhiFamily:
    """Direct maps eta*Id, H(eta*Id), H(H(eta*Id)), ... with verdicts.

    Verdicts for j >= 3 are those of the conjugate iterates h_j (whose
    boundedness equals that of the composition Phi_j o ... o Phi_1, hence of
    the first bounded Phi_j itself); their fit windows therefore refer to the
    u-axis.  Verdicts for Phi_1 and Phi_2 come from classifying the direct
    grids.
    """

    eta: float
    iterates: list
    verdicts: list[TailClass]
    j_eta: int | None  # first bounded index (iterate 1 is eta*Id); None if none by j_max

    @property
    def j_or_inf(self) -> float:
        return math.inf if self.j_eta is None else float(self.j_eta)


def phi_family(spec: WeightSpec, eta: float, j_max: int = MAX_ITERATES,
               x_top: float = DEFAULT_X_TOP, u_top: float = DEFAULT_U_TOP,
               tol_sat: float = DEFAULT_TOL_SAT,
               slope_lo: float = DEFAULT_SLOPE_LO,
               slope_hi: float = DEFAULT_SLOPE_HI) -> PhiFamily:
    """Iterate the half-step map from eta*Id until an iterate is bounded.

    The iteration itself runs on the conjugate u-axis (see
    ``conjugate_iterate``): iterating H directly on the x-grid becomes
    undecidable — or outright degenerate — as soon as a collapsing iterate
    flattens against the grid, while the u-axis keeps the phase transition
    inside the hull.  The direct maps returned here are materialized from the
    conjugate iterates through

        Phi_j = W^{-1} o h_j o h_{j-1}^{-1} o W   (j >= 3),

    which is the same function H would produce, evaluated stably.  Phi_2 is
    built by a single direct half-step (its integrand never degenerates).

    Raises ClassificationError if any verdict comes back undetermined: that
    means the hull cannot separate the phases and enlarging it (or moving
    eta off a critical value) is the only honest fix.
    """
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    if not 2 <= j_max <= MAX_ITERATES:
        raise ValueError(f"j_max must be in [2, {MAX_ITERATES}]")
    ws = workspace(spec, x_top=x_top, u_top=u_top)
    xs = ws.x_nodes
    first = _scaled_identity_gridfn(eta, xs)
    iterates: list = [first]
    verdicts = [classify_tail(first, tol_sat, slope_lo, slope_hi)]
    j_eta = None
    phi2 = apply_H(spec, ScaledIdentity(eta), x_top=x_top)
    tc2 = classify_tail(phi2, tol_sat, slope_lo, slope_hi)
    iterates.append(phi2)
    verdicts.append(tc2)
    if tc2.verdict == "undetermined":
        raise ClassificationError(
            f"direct iterate j=2 at eta={eta} is undetermined "
            f"(slope {tc2.fitted_exponent:.4f}, saturation {tc2.saturation_ratio:.4f})",
            tc2)
    if tc2.verdict == "bounded":  # cannot happen for unbounded W; stay honest
        return PhiFamily(eta, iterates, verdicts, 2)
    if j_max == 2:
        return PhiFamily(eta, iterates, verdicts, None)

    cf = conjugate_iterate(spec, eta, j_max=j_max, u_top=u_top,
                           tol_sat=tol_sat, slope_lo=slope_lo, slope_hi=slope_hi)
    stitches = [float(s) for s in stitch_points(spec)]
    u_x = np.asarray(ws.W(xs))
    for j in range(3, 2 + len(cf.iterates)):
        h_prev = cf.iterates[j - 3]
        h_j = cf.iterates[j - 2]
        # Materialize only where h_{j-1} inverts on its own grid: beyond that
        # the pullback t = h_{j-1}^{-1}(W(x)) leaves every float hull (which
        # is why index verdicts come from the log-domain probe instead).
        top = 0.99 * float(h_prev.values[-1])
        xs_j = xs[u_x <= top] if u_x[-1] > top else xs
        if xs_j.size < 8:
            raise ClassificationError(
                f"direct iterate {j} has no materializable domain: the "
                f"previous conjugate iterate tops out at {top:.3e}, below "
                f"W of the requested grid")

        def evaluate(nodes):
            t = np.asarray(h_prev.inverse(np.asarray(ws.W(nodes))))
            return np.asarray(ws.Winv(np.asarray(h_j(t))))

        nodes, vals = _promote_kinks(xs_j, evaluate(xs_j), evaluate,
                                     stitches, stitches)
        # Phi_j = H(Phi_{j-1}), so Phi_j' = w(Phi_j) / w(Phi_{j-1}^{-1}); the
        # previous inverse can exceed float range, so take the ratio in logs
        # (underflow to a zero slope is the honest limit there).
        t = np.asarray(h_prev.inverse(np.asarray(ws.W(nodes))))
        if j == 3:
            log_prev = math.log(eta) + _log_winv(ws, t)
        else:
            log_prev = _log_winv(ws, np.asarray(cf.iterates[j - 4](t)))
        derivs = np.exp(np.asarray(eval_w_log(spec, np.log(vals)))
                        - np.asarray(eval_w_log(spec, log_prev)))
        phi_j = GridFn(nodes, vals, derivs,
                       lo_tail=fit_power_tail(nodes, vals, "lo"),
                       hi_tail=fit_power_tail(nodes, vals, "hi"))
        iterates.append(phi_j)
        verdicts.append(cf.verdicts[j - 2])
    return PhiFamily(eta, iterates, verdicts, cf.j_eta)


@dataclass
class ConjugateFamily:
    """Conjugate iterates h_2 = eta*Id, h_3, ... on the u-axis, with verdicts."""

    eta: float
    iterates: list
    verdicts: list[TailClass]
    j_eta: int | None  # first bounded h_j (indexing starts at 2); None if none

    @property
    def j_or_inf(self) -> float:
        return math.inf if self.j_eta is None else float(self.j_eta)


def conjugate_iterate(spec: WeightSpec, eta: float, j_max: int = MAX_ITERATES,
                      u_top: float = DEFAULT_U_TOP,
                      tol_sat: float = DEFAULT_TOL_SAT,
                      slope_lo: float = DEFAULT_SLOPE_LO,
                      slope_hi: float = DEFAULT_SLOPE_HI) -> ConjugateFamily:
    """Iterate the conjugated map on the u-axis until an iterate is bounded.

    h_2(u) = eta*u exactly; then
    h_{j+1}(u) = eta * int_0^u w(W^{-1}(h_j(t))) / w(eta W^{-1}(t)) dt.
    Verdicts here agree with the direct iterates but classify far from the
    hull edge, because a u-hull of 1e12 corresponds to astronomically large
    direct arguments.
    """
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    if not 3 <= j_max <= MAX_ITERATES:
        raise ValueError(f"j_max must be in [3, {MAX_ITERATES}]")
    ws = workspace(spec, u_top=u_top)
    conj = ws.conj
    log_eta = math.log(eta)
    h = _scaled_identity_gridfn(eta, ws.u_nodes)
    iterates: list = [h]
    verdicts = [classify_tail(h, tol_sat, slope_lo, slope_hi)]
    u_breaks = [float(ws.W(s)) for s in stitch_points(spec)]
    # denominator kink: eta * W^{-1}(t) crosses the stitch at t = W(stitch/eta)
    den_breaks = [float(ws.W(s / eta)) for s in stitch_points(spec)]
    j_eta = None
    for j in range(3, j_max + 1):
        prev = iterates[-1]

        def integrand(u, prev=prev):
            u = np.asarray(u, dtype=np.float64)
            hu = np.asarray(prev(u), dtype=np.float64)
            num = np.asarray(conj.omega_log(hu))
            den = np.asarray(conj.omega_log(u, shift=log_eta))
            return eta * np.exp(num - den)

        extra = list(u_breaks) + list(den_breaks) + _inverse_points(prev, u_breaks)
        values = _cumulative_on_nodes(integrand, ws.u_nodes, extra)
        nxt = GridFn(ws.u_nodes, values, integrand(ws.u_nodes),
                     lo_tail=fit_power_tail(ws.u_nodes, values, "lo"),
                     hi_tail=fit_power_tail(ws.u_nodes, values, "hi"))
        tc = classify_tail(nxt, tol_sat, slope_lo, slope_hi)
        iterates.append(nxt)
        verdicts.append(tc)
        if tc.verdict == "undetermined":
            raise ClassificationError(
                f"conjugate iterate j={j} at eta={eta} is undetermined "
                f"(slope {tc.fitted_exponent:.4f}, saturation {tc.saturation_ratio:.4f})", tc)
        if tc.verdict == "bounded":
            j_eta = j
            break
    return ConjugateFamily(eta, iterates, verdicts, j_eta)


@dataclass
class GSequence:
    """g-iterates g_1 = eta*Id, g_2 = G(g_1), ... with verdicts."""

    eta: float
    iterates: list
    verdicts: list[TailClass]
    i_eta: int | None  # first bounded index k >= 2; None if none by k_max

    @property
    def i_or_inf(self) -> float:
        return math.inf if self.i_eta is None else float(self.i_eta)


def g_sequence(spec: WeightSpec, eta: float, k_max: int = MAX_ITERATES,
               u_top: float = DEFAULT_U_TOP, tol_sat: float = DEFAULT_TOL_SAT,
               slope_lo: float = DEFAULT_SLOPE_LO,
               slope_hi: float = DEFAULT_SLOPE_HI,
               stop_at_bounded: bool = True) -> GSequence:
    """Iterate G from eta*Id; the lower index is the first bounded iterate."""
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    if not 2 <= k_max <= MAX_ITERATES:
        raise ValueError(f"k_max must be in [2, {MAX_ITERATES}]")
    ws = workspace(spec, u_top=u_top)
    g = _scaled_identity_gridfn(eta, ws.u_nodes)
    iterates: list = [g]
    verdicts = [classify_tail(g, tol_sat, slope_lo, slope_hi)]
    i_eta = None
    for k in range(2, k_max + 1):
        nxt = apply_G(spec, iterates[-1], u_top=u_top)
        tc = classify_tail(nxt, tol_sat, slope_lo, slope_hi)
        iterates.append(nxt)
        verdicts.append(tc)
        if tc.verdict == "undetermined":
            raise ClassificationError(
                f"g-iterate k={k} at eta={eta} is undetermined "
                f"(slope {tc.fitted_exponent:.4f}, saturation {tc.saturation_ratio:.4f})", tc)
        if tc.verdict == "bounded" and i_eta is None:
            i_eta = k
            if stop_at_bounded:
                break
    return GSequence(eta, iterates, verdicts, i_eta)


# ---------------------------------------------------------------------------
# index sweeps
# ---------------------------------------------------------------------------

def _fmt_index(v) -> float | str:
    return "inf" if v is None else v


@dataclass
class IndexReport:
    """Lower/upper localization indices over an eta-sweep around 1/2."""

    family: str
    params: tuple[float, ...]
    etas: list[float]
    i_values: list[int | None]
    j_values: list[int | None]
    i_minus: int | None
    i_plus: int | None
    j_minus: int | None
    j_plus: int | None
    evidence: list[dict] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "family": self.family,
            "params": list(self.params),
            "eta": self.etas,
            "i": [_fmt_index(v) for v in self.i_values],
            "j": [_fmt_index(v) for v in self.j_values],
            "i_minus": _fmt_index(self.i_minus),
            "i_plus": _fmt_index(self.i_plus),
            "j_minus": _fmt_index(self.j_minus),
            "j_plus": _fmt_index(self.j_plus),
            "evidence": self.evidence,
        }


def _check_monotone(etas, vals, label):
    as_inf = [math.inf if v is None else v for v in vals]
    for a, b in zip(as_inf, as_inf[1:]):
        if b < a:
            raise ClassificationError(
                f"{label} is not non-decreasing over the eta sweep: "
                f"{list(zip(etas, as_inf))}")
    finite = [v for v in as_inf if math.isfinite(v)]
    if finite and max(finite) - min(finite) > 1:
        raise ClassificationError(
            f"{label} spans more than two consecutive values over the sweep: "
            f"{list(zip(etas, as_inf))}")


def index_sweep(spec: WeightSpec, etas, j_max: int = MAX_ITERATES,
                m_top: float = DEFAULT_M_TOP, **tol_kw) -> IndexReport:
    """Both indices for every eta in the sweep, with monotonicity checks.

    Verdicts come from the log-domain probes (``deep_index_probe``), which
    carry the iteration to u = e^m_top — deep enough that even the critical
    family's spurious finite-depth saturation dissolves and every unbounded
    iterate shows its growth.  An undetermined probe verdict raises
    ClassificationError rather than guessing; so does a non-monotone or
    more-than-two-valued index across the sweep.
    """
    etas = sorted(float(e) for e in etas)
    if not etas:
        raise ValueError("eta sweep is empty")
    if etas[0] <= 0.0 or etas[-1] >= 1.0:
        raise ValueError("eta values must lie in (0, 1)")
    i_vals, j_vals, evidence = [], [], []
    for eta in etas:
        pg = deep_index_probe(spec, eta, route="g", k_max=j_max, m_top=m_top, **tol_kw)
        ph = deep_index_probe(spec, eta, route="h", k_max=j_max, m_top=m_top, **tol_kw)
        for probe, label in ((pg, "lower"), (ph, "upper")):
            if probe.verdicts[-1] == "undetermined":
                raise ClassificationError(
                    f"{label}-index probe at eta={eta} is undetermined at "
                    f"iterate {len(probe.verdicts)} (slope "
                    f"{probe.slopes[-1]:.4f}); depth {probe.m_top:g} in log u "
                    "does not separate the phases")
        i_vals.append(pg.index)
        j_vals.append(ph.index)
        evidence.append({
            "eta": eta,
            "i": _fmt_index(pg.index),
            "j": _fmt_index(ph.index),
            "m_top": pg.m_top,
            "g_slopes": [round(s, 6) for s in pg.slopes],
            "h_slopes": [round(s, 6) for s in ph.slopes],
            "g_log_saturations": [round(s, 6) for s in pg.log_saturations],
            "h_log_saturations": [round(s, 6) for s in ph.log_saturations],
        })
    _check_monotone(etas, i_vals, "lower index i_eta")
    _check_monotone(etas, j_vals, "upper index j_eta")

    def _nearest(side):
        if side == "below":
            cand = [(e, i, j) for e, i, j in zip(etas, i_vals, j_vals) if e < 0.5]
            return cand[-1] if cand else (None, None, None)
        cand = [(e, i, j) for e, i, j in zip(etas, i_vals, j_vals) if e > 0.5]
        return cand[0] if cand else (None, None, None)

    _, i_minus, j_minus = _nearest("below")
    _, i_plus, j_plus = _nearest("above")
    return IndexReport(spec.family, spec.params, etas, i_vals, j_vals,
                       i_minus, i_plus, j_minus, j_plus, evidence)


def index_limits(spec: WeightSpec, eta_half_width: float = 0.05, n_eta: int = 5,
                 j_max: int = MAX_ITERATES, m_top: float = DEFAULT_M_TOP,
                 **tol_kw) -> IndexReport:
    """Indices on a symmetric eta-grid around 1/2 (n_eta points each side)."""
    if not 0.0 < eta_half_width <= 0.2:
        raise ValueError("eta_half_width must lie in (0, 0.2]")
    if n_eta < 1:
        raise ValueError("n_eta must be at least 1")
    offs = eta_half_width * np.arange(1, n_eta + 1) / n_eta
    etas = np.concatenate([0.5 - offs[::-1], [0.5], 0.5 + offs])
    return index_sweep(spec, etas, j_max=j_max, m_top=m_top, **tol_kw)


# ---------------------------------------------------------------------------
# growth sandwich
# ---------------------------------------------------------------------------

@dataclass
class SandwichReport:
    eta: float
    k: int
    alpha: float
    predicted_exponent: float
    fitted_exponent: float  # nan when the fit failed (see fit_error)
    rel_error: float
    fit_window: tuple[float, float]  # in the units named by window_units
    window_units: str  # "u" (hull fit) or "log u" (deep fit)
    supercritical: bool  # predicted exponent > 1: iterate is bounded, fit is transitional
    method: str  # "exact", "deep", or "hull"
    fit_error: str | None = None

    def as_dict(self) -> dict:
        return {
            "eta": self.eta, "k": self.k, "alpha": self.alpha,
            "predicted_exponent": self.predicted_exponent,
            "fitted_exponent": self.fitted_exponent,
            "rel_error": self.rel_error,
            "fit_window": list(self.fit_window),
            "window_units": self.window_units,
            "supercritical": self.supercritical,
            "method": self.method,
            "fit_error": self.fit_error,
        }


def growth_sandwich_check(spec: WeightSpec, eta: float, k: int,
                          method: str = "auto",
                          u_top: float = DEFAULT_U_TOP,
                          m_top: float = 1e7,
                          window_decades: float = 2.0) -> SandwichReport:
    """Fit e in g_k(x) ~ x*exp(-c (log x)^e) and compare to (k-1)(1/alpha - 1).

    Defined for polylog weights.  While the predicted exponent is below 1 the
    iterate is unbounded and the estimate is genuinely asymptotic, so the fit
    runs on the log-domain axis (``method="deep"``), whose window [m_top/100,
    m_top] in log u sits far past the transitional corrections that pollute
    any float-valued hull.  For predicted exponent > 1 the iterate is bounded
    and the exponent only shows transiently; the fit then uses the plain hull
    window (``method="hull"``) and the report flags ``supercritical`` — pick
    eta near 1 so the transitional window covers the hull top.  k=1 is exact
    (g_1 = eta*Id gives exponent 0).  Fit failures are reported in
    ``fit_error`` with a nan exponent, not raised.
    """
    if spec.family != "polylog":
        raise ValueError("the sandwich exponent is defined for polylog weights")
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    if k < 1:
        raise ValueError("k must be at least 1")
    if method not in ("auto", "deep", "hull"):
        raise ValueError("method must be 'auto', 'deep', or 'hull'")
    alpha = spec.params[0]
    predicted = (k - 1) * (1.0 / alpha - 1.0)
    supercritical = predicted > 1.0
    if k == 1:
        # g_1 = eta*Id: log(x/g_1) = -log(eta), constant, exponent exactly 0
        return SandwichReport(eta, k, alpha, predicted, 0.0, 0.0,
                              (0.0, math.inf), "u", supercritical, "exact")
    if method == "auto":
        method = "hull" if supercritical else "deep"

    if method == "deep":
        try:
            fitted = deep_sandwich_fit(spec, eta, k, m_top=m_top)
        except (ValueError, ClassificationError) as exc:
            return SandwichReport(eta, k, alpha, predicted, float("nan"),
                                  float("nan"), (m_top / 100.0, m_top),
                                  "log u", supercritical, method, str(exc))
        rel = abs(fitted - predicted) / predicted if predicted > 0 else abs(fitted)
        return SandwichReport(eta, k, alpha, predicted, fitted, rel,
                              (m_top / 100.0, m_top), "log u",
                              supercritical, method)

    ws = workspace(spec, u_top=u_top)
    g = _scaled_identity_gridfn(eta, ws.u_nodes)
    for _ in range(k - 1):
        g = apply_G(spec, g, u_top=u_top)
    nodes = g.nodes
    win = nodes >= nodes[-1] / 10**window_decades
    x = nodes[win]
    window = (float(x[0]), float(x[-1]))
    ratio = x / g.values[win]
    if np.any(ratio <= 1.0):
        return SandwichReport(eta, k, alpha, predicted, float("nan"),
                              float("nan"), window, "u", supercritical, method,
                              "iterate is not below the identity on the fit window")
    y = np.log(np.log(ratio))
    z = np.log(np.log(x))
    if np.allclose(y, y[0], rtol=0, atol=1e-12):
        fitted = 0.0  # constant log-ratio: exponent exactly zero
    else:
        fitted = float(np.polyfit(z, y, 1)[0])
    rel = abs(fitted - predicted) / predicted if predicted > 0 else abs(fitted)
    return SandwichReport(eta, k, alpha, predicted, fitted, rel, window,
                          "u", supercritical, method)


# ---------------------------------------------------------------------------
# localization profile heights
# ---------------------------------------------------------------------------

def psi_profile(spec: WeightSpec, i_max: int, x_top: float = DEFAULT_X_TOP,
                u_top: float = DEFAULT_U_TOP) -> list:
    """Predicted local-time height profiles at eta = 1/2.

    Returns ``[Psi_1, ..., Psi_i_max]`` where ``Psi_i(n)`` composes the first
    i direct maps on n/2.  ``Psi_1`` is the exact quarter-scaling n -> n/4
    (returned as ScaledIdentity so that identity holds bitwise); higher
    orders are materialized on a geometric n-grid from the conjugate
    iterates, ``Psi_i(n) = W^{-1}(h_i(W(n/2)))``, which equals the direct
    composition without stacking interpolation error.

    ``i_max`` may not exceed the upper index just right of 1/2 (checked with
    a probe sweep), and the conjugate family must classify cleanly.
    """
    if i_max < 1:
        raise ValueError("i_max must be at least 1")
    limits = index_limits(spec)
    if limits.i_plus is None or i_max > limits.i_plus:
        bound = "infinite" if limits.i_plus is None else str(limits.i_plus)
        raise ValueError(
            f"i_max={i_max} exceeds the upper index i+ = {bound}; profiles "
            "beyond the first bounded map have no localization meaning")
    profiles: list = [ScaledIdentity(0.25)]
    if i_max == 1:
        return profiles
    ws = workspace(spec, x_top=x_top, u_top=u_top)
    cf = conjugate_iterate(spec, 0.5, j_max=max(i_max, 3), u_top=u_top)
    xs = ws.x_nodes
    stitches = [float(s) for s in stitch_points(spec)]
    for i in range(2, i_max + 1):
        h_i = cf.iterates[i - 2]

        def evaluate(nodes):
            hu = np.asarray(h_i(np.asarray(ws.W(nodes * 0.5))))
            return np.asarray(ws.Winv(hu))

        # inner kinks sit where n/2 crosses a stitch of w
        nodes, vals = _promote_kinks(xs, evaluate(xs), evaluate,
                                     [2.0 * s for s in stitches], stitches)
        # chain rule through W^{-1} o h_i o W(n/2): with Psi_1(n) = n/4,
        # Psi_i'(n) = w(Psi_i(n)) w(Psi_{i-1}(n)) / (4 w(n/4) w(n/2))
        if i == 2:
            prev = nodes / 4.0
        else:
            prev = np.asarray(ws.Winv(np.asarray(
                cf.iterates[i - 3](np.asarray(ws.W(nodes * 0.5))))))
        derivs = (np.asarray(eval_w(spec, vals)) * np.asarray(eval_w(spec, prev))
                  / (4.0 * np.asarray(eval_w(spec, nodes / 4.0))
                     * np.asarray(eval_w(spec, nodes / 2.0))))
        profiles.append(GridFn(nodes, vals, derivs,
                               lo_tail=fit_power_tail(nodes, vals, "lo"),
                               hi_tail=fit_power_tail(nodes, vals, "hi")))
    return profiles


# ---------------------------------------------------------------------------
# hat-walk envelope: f_eta and epsilon
# ---------------------------------------------------------------------------

@dataclass
class FEta:
    f: GridFn
    phi2: GridFn
    checks: dict
    used_fallback: bool


def build_f_eta(spec: WeightSpec, eta: float, x_top: float = DEFAULT_X_TOP) -> FEta:
    """Envelope function f >= phi_2 used by the hat walk at the origin edge.

    Candidate f = phi_2 + x/(1+log(1+x))^2; acceptance needs (a) f >= phi_2
    on all nodes, (b) f(X)/X <= 0.05 at the hull top, (c) (W - W_f)(X) <=
    0.1*ell(X), (d) W - W_f increasing with a strictly larger value at the
    top than mid-hull.  If the bump candidate fails but phi_2 alone sustains
    the gap conditions (c)+(d), falls back to f = phi_2 with a warning;
    otherwise aborts with both check tables.

    (b) and (c) are finite-hull surrogates for genuinely asymptotic o(x) and
    o(ell) statements, and the decay is logarithmic, so the hull must be deep
    enough for the weight at hand: polylog(0.6) at eta=0.54 first clears both
    thresholds near x_top = 1e34 (the gap ratio is 0.46 at 1e10 and 0.39 at
    1e12).  Weights whose ell does not eventually increase (e.g. the linear
    family, where ell -> 1) violate the construction's standing assumption
    and fail (c) at every hull: the gap tends to a positive constant while
    ell does not grow, so this builder honestly aborts for them.
    """
    if not 0.5 < eta < 1.0:
        raise ValueError("eta must lie in (1/2, 1)")
    ws = workspace(spec, x_top=x_top)
    phi2 = apply_H(spec, ScaledIdentity(eta), x_top=x_top)
    nodes = phi2.nodes  # may carry extra kink nodes beyond the workspace grid

    def assemble(values):
        return GridFn(nodes, values,
                      lo_tail=fit_power_tail(nodes, values, "lo"),
                      hi_tail=fit_power_tail(nodes, values, "hi"))

    def evaluate(f):
        W_f = compute_W_psi(spec, f, x_max=x_top)
        D = ws.W.values - W_f.values  # compute_W and compute_W_psi share grids
        wn = ws.W.nodes
        X = wn[-1]
        mid = int(np.searchsorted(wn, math.sqrt(wn[0] * X)))
        checks = {
            "dominates_phi2": bool(np.all(f.values >= phi2.values)),
            "top_fraction": float(f.values[-1] / X),
            "gap_over_ell": float(D[-1] / eval_ell(spec, X)),
            "gap_increasing": bool(np.all(np.diff(D) >= -1e-9 * abs(D[-1]))),
            "gap_top_exceeds_mid": bool(D[-1] > D[mid]),
        }
        gap_ok = (checks["gap_over_ell"] <= 0.1 and checks["gap_increasing"]
                  and checks["gap_top_exceeds_mid"])
        all_ok = (gap_ok and checks["dominates_phi2"]
                  and checks["top_fraction"] <= 0.05)
        return checks, gap_ok, all_ok

    bump = nodes / (1.0 + np.log1p(nodes)) ** 2
    f = assemble(phi2.values + bump)
    checks, _, all_ok = evaluate(f)
    if all_ok:
        return FEta(f, phi2, checks, used_fallback=False)
    f0 = assemble(phi2.values.copy())
    checks0, gap_ok0, _ = evaluate(f0)
    # abort only when neither candidate sustains the gap conditions; the bare
    # map trivially dominates itself, so the gap checks are the live ones
    if gap_ok0:
        warnings.warn(
            "envelope bump failed its growth checks; falling back to f = phi_2",
            RuntimeWarning, stacklevel=2)
        return FEta(f0, phi2, checks0, used_fallback=True)
    raise ValueError(
        f"no admissible envelope at eta={eta}: bump checks {checks}, "
        f"bare checks {checks0}")


@dataclass
class EpsilonChoice:
    epsilon: float
    eta: float
    index_at_eta: int
    i_plus: int
    tried: list[tuple[float, int | None]]


def choose_epsilon(spec: WeightSpec, i_plus: int | None = None,
                   max_k: int = 12, m_top: float = DEFAULT_M_TOP) -> EpsilonChoice:
    """Largest epsilon = 2^-k with the lower index at eta = 1/2 + 3*epsilon
    equal to the upper index at 1/2.

    The search starts at k=3: eta = 1/2 + 3*epsilon must stay below 1, which
    needs epsilon < 1/6, and 2^-3 is the largest power of two under that.
    Indices come from the log-domain probe (g route), the same authority as
    index_limits.
    """
    if i_plus is None:
        i_plus = index_limits(spec, m_top=m_top).i_plus
    if i_plus is None:
        raise ValueError("upper index is infinite; no epsilon can reproduce it")
    tried = []
    for k in range(3, max_k + 1):
        eps = 2.0 ** -k
        eta = 0.5 + 3.0 * eps
        probe = deep_index_probe(spec, eta, route="g", m_top=m_top)
        tried.append((eps, probe.index))
        if probe.index == i_plus:
            return EpsilonChoice(eps, eta, probe.index, i_plus, tried)
    raise ValueError(
        f"no epsilon in 2^-3..2^-{max_k} matches the upper index {i_plus}; "
        f"tried {tried}")
