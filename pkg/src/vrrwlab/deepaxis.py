"""Deep log-domain probe for iterate classification beyond float hulls.

The plain conjugate axis carries iterates as float-valued functions of
u = W(x), which caps the observable depth near u ~ 1e90 (cubic cell
evaluation overflows beyond that).  That is enough to separate the phases
for polylog weights, but some verdicts only become visible at depths like
u ~ exp(1e9) — for the critical weight w(x) = x·exp(-log x/log log x) every
iterate is unbounded, yet the growth reasserts itself so slowly that at any
float-representable u the late iterates look exactly flat.

This module re-runs the same iterations one logarithm deeper: an iterate is
stored as s(m) = log g(e^m) on a grid of m = log u, and the integral step

    g_{k+1}(e^m) = int_{-inf}^{m} exp( omega(s_k(mu)) - omega(mu) + mu ) dmu

is evaluated by modelling the log-integrand as piecewise linear between
refined grid points and summing the resulting closed-form pieces with a
running logaddexp — no overflow at any depth a float can index.  Because
every geometric m-segment spans far more than two decades of u, the verdict
slope d log g / d log u is read off the top segments directly.

Absolute accuracy here is deliberately modest (the piecewise-linear model is
good to ~1e-2 in log space at the default refinement); verdict slopes are
averages over m-ranges of 1e8 or more, so errors of even a few units in s
are irrelevant.  The plain-axis operators remain the value oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .calculus import compute_W
from .grid import GridFn, geometric_nodes
from .weights import WeightSpec, eval_ell_log, eval_w_log

__all__ = [
    "DeepAxis",
    "deep_axis",
    "DeepProbe",
    "deep_index_probe",
    "deep_sandwich_fit",
]

DEFAULT_M_TOP = 1e12
M_PER_DECADE = 32
REFINE = 4
PIECES = 16
L_CAP = 1e300  # largest log-site the axis will index


def _piece_log_integrals(q_lo, q_hi, width):
    """log of int exp(linear) over pieces with endpoint log-values q_lo, q_hi."""
    q_lo = np.asarray(q_lo, float)
    q_hi = np.asarray(q_hi, float)
    width = np.asarray(width, float)
    diff = q_hi - q_lo
    out = np.empty_like(q_lo)
    flat = np.abs(diff) < 1e-9
    out[flat] = 0.5 * (q_lo[flat] + q_hi[flat]) + np.log(width[flat])
    steep = ~flat
    hi = np.maximum(q_lo[steep], q_hi[steep])
    lo = np.minimum(q_lo[steep], q_hi[steep])
    rate = np.abs(diff[steep]) / width[steep]
    out[steep] = hi + np.log1p(-np.exp(lo - hi)) - np.log(rate)
    return out


def _refined(nodes: np.ndarray, per_cell: int) -> np.ndarray:
    """Insert per_cell-1 geometric points inside every cell."""
    ratios = (nodes[1:] / nodes[:-1])[:, None] ** (np.arange(per_cell) / per_cell)
    fine = (nodes[:-1][:, None] * ratios).ravel()
    return np.append(fine, nodes[-1])


@dataclass
class DeepAxis:
    """log W(e^L) over an L-range deep enough to invert any m = log u probe."""

    spec: WeightSpec
    grid: GridFn  # nodes L, values log W(e^L)

    @property
    def m_reach(self) -> float:
        """Largest m = log u this axis can invert with headroom."""
        return float(self.grid.values[-1]) - 1.0

    def V(self, m):
        """L = log W^{-1}(e^m) for m = log u, clamped at the grid bottom."""
        arr = np.minimum(np.maximum(np.asarray(m, float), self.grid.values[0]),
                         self.grid.values[-1])
        return np.asarray(self.grid.inverse(arr))

    def omega_log(self, m, shift: float = 0.0):
        """log w(e^shift * W^{-1}(e^m))."""
        return np.asarray(eval_w_log(self.spec, self.V(m) + shift))


def _build_deep_axis(spec: WeightSpec, m_top: float) -> DeepAxis:
    if spec.family == "table":
        raise ValueError("tabulated weights cannot be continued beyond their hull")
    w = compute_W(spec, x_max=1e6, nodes_per_decade=32)
    keep = w.values >= 1e-6
    L_low = np.log(w.nodes[keep])
    logW_low = np.log(w.values[keep])
    L0 = L_low[-1]
    logW0 = logW_low[-1]

    # grow the L-horizon by squaring the factor each round: weights whose W
    # grows slower than every iterated exponential (e.g. linear, where
    # log W(e^L) = log L + O(1)) hit L_CAP instead and the axis is clamped to
    # the deepest m a float-sized L can express (~700, i.e. u ~ 1e304).
    target = m_top * 1.02 + 2.0
    for power in (2.0 ** np.arange(12)):
        if power * math.log10(4.0) + math.log10(L0) >= 300.0:
            L_hi = L_CAP
        else:
            L_hi = min(L0 * 4.0 ** power, L_CAP)
        nodes = geometric_nodes(L0, L_hi, M_PER_DECADE)
        fine = _refined(nodes, PIECES)
        ell = np.asarray(eval_ell_log(spec, fine))
        pieces = _piece_log_integrals(ell[:-1], ell[1:], np.diff(fine))
        cum = np.logaddexp.accumulate(pieces)
        log_w = np.logaddexp(logW0, cum)[PIECES - 1::PIECES]
        if log_w[-1] - logW0 < 1e-9:
            raise ValueError(
                f"W barely grows past its direct hull for weight {spec.label!r} "
                "(bounded W?); no deep axis exists")
        if log_w[-1] >= target or L_hi >= L_CAP:
            stop = min(int(np.searchsorted(log_w, target)) + 2, log_w.size)
            L = np.concatenate([L_low, nodes[1:stop + 1]])
            logW = np.concatenate([logW_low, log_w[:stop]])
            break
    else:  # pragma: no cover - 4^(2^11) dwarfs L_CAP, so this cannot trigger
        raise ValueError(
            f"could not continue W to log-depth {m_top:g} for weight {spec.label!r}")

    if logW[-1] < 12.0:
        raise ValueError(
            f"W reaches only log W = {logW[-1]:.3g} at the largest representable "
            f"argument for weight {spec.label!r}; too shallow to probe")
    derivs = np.exp(np.asarray(eval_ell_log(spec, L)) - logW)
    return DeepAxis(spec, GridFn(L, logW, derivs, lo_tail=None, hi_tail=None))


@lru_cache(maxsize=32)
def _deep_axis_cached(spec: WeightSpec, m_top: float) -> DeepAxis:
    return _build_deep_axis(spec, m_top)


def deep_axis(spec: WeightSpec, m_top: float = DEFAULT_M_TOP) -> DeepAxis:
    """Continue (L, log W) far enough that log W reaches m_top.

    The low range comes from the direct W grid; beyond it, cells of
    int exp(ell_log) dL are accumulated entirely in log space.  If even
    L = 1e300 cannot push log W to m_top (weights with fast W, like linear),
    the axis is clamped there; ``m_reach`` tells how deep it actually goes.
    """
    return _deep_axis_cached(spec, float(m_top))


@dataclass
class DeepProbe:
    """Verdicts for g- or h-iterates probed at log-depth m_top."""

    spec: WeightSpec
    eta: float
    route: str  # "g" or "h"
    m_top: float
    m: np.ndarray             # sub-grid of m = log u
    iterates: list[np.ndarray]  # s_k(m) = log(iterate(e^m))
    verdicts: list[str]
    slopes: list[float]
    log_saturations: list[float]
    index: int | None         # first bounded position (g: k >= 2, h: j >= 3)

    @property
    def index_or_inf(self) -> float:
        return math.inf if self.index is None else float(self.index)


def _deep_verdict(m, s, tol_sat, slope_lo, slope_hi):
    half = int(np.searchsorted(m, 0.5 * m[-1]))
    log_sat = float(s[-1] - s[min(half, s.size - 1)])
    window = m >= m[-1] / 100.0
    slope = float(np.polyfit(m[window], s[window], 1)[0])
    if log_sat <= math.log1p(tol_sat) and slope <= slope_lo:
        verdict = "bounded"
    elif slope >= slope_hi:
        verdict = "unbounded"
    else:
        verdict = "undetermined"
    return verdict, slope, log_sat


def deep_index_probe(spec: WeightSpec, eta: float, route: str = "g",
                     k_max: int = 8, m_top: float = DEFAULT_M_TOP,
                     tol_sat: float = 0.02, slope_lo: float = 0.02,
                     slope_hi: float = 0.10, m_lo: float = 1.0) -> DeepProbe:
    """Iterate in double-log coordinates and classify each level.

    route="g" probes the plain iterates of G; route="h" probes the
    eta-conjugated iterates (indexing starts at 2 either way, matching the
    plain-axis sequences: the first bounded g is i_eta, the first bounded
    h is j_eta).
    """
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    if route not in ("g", "h"):
        raise ValueError("route must be 'g' or 'h'")
    axis = deep_axis(spec, m_top=m_top)
    m_top = min(float(m_top), axis.m_reach)
    if m_top < 30.0 * m_lo:
        raise ValueError(
            f"axis for {spec.label!r} reaches only log u = {m_top:.3g}; "
            "raise m_lo resolution or use the plain axis")
    nodes = geometric_nodes(m_lo, m_top, M_PER_DECADE)
    m = _refined(nodes, REFINE)
    dm = np.diff(m)
    log_eta = math.log(eta)
    shift = log_eta if route == "h" else 0.0
    prefactor = log_eta if route == "h" else 0.0
    den = axis.omega_log(m, shift=shift)

    s = m + log_eta
    iterates = [s]
    verdicts, slopes, sats = [], [], []
    v, sl, sat = _deep_verdict(m, s, tol_sat, slope_lo, slope_hi)
    verdicts.append(v)
    slopes.append(sl)
    sats.append(sat)
    index = None
    first = 3 if route == "h" else 2
    for pos in range(first, k_max + 1):
        q = axis.omega_log(s) - den + m
        pieces = _piece_log_integrals(q[:-1], q[1:], dm)
        # integral below m_lo: the integrand there is ~exp(q(m_lo)) per unit
        stub = q[0]
        s = prefactor + np.logaddexp(stub, np.concatenate(
            [[-np.inf], np.logaddexp.accumulate(pieces)]))
        iterates.append(s)
        v, sl, sat = _deep_verdict(m, s, tol_sat, slope_lo, slope_hi)
        verdicts.append(v)
        slopes.append(sl)
        sats.append(sat)
        if v == "bounded":
            index = pos
            break
        if v == "undetermined":
            break
    return DeepProbe(spec, eta, route, m_top, m, iterates, verdicts,
                     slopes, sats, index)


def deep_sandwich_fit(spec: WeightSpec, eta: float, k: int,
                      m_top: float = 1e6) -> float:
    """Fitted exponent e in g_k(x) = x exp(-c (log x)^e), probed deep.

    Valid while g_k is unbounded ((k-1)(1/alpha - 1) < 1): the fit window
    [m_top/100, m_top] then sits far inside the asymptotic regime, where the
    plain axis would still be dominated by transitional corrections.
    """
    probe = deep_index_probe(spec, eta, route="g", k_max=max(k, 2), m_top=m_top)
    if len(probe.iterates) < k:
        raise ValueError(
            f"iterate {k} not reached (first bounded at {probe.index})")
    s = probe.iterates[k - 1]
    y = probe.m - s  # log(x/g) = c (log x)^e
    window = probe.m >= probe.m[-1] / 100.0
    if np.any(y[window] <= 0):
        raise ValueError("iterate is not below the identity on the fit window")
    z = np.log(y[window])
    if np.allclose(z, z[0], rtol=0, atol=1e-12):
        return 0.0
    return float(np.polyfit(np.log(probe.m[window]), z, 1)[0])
