"""Reinforcement weight families.

Every walk in this package is driven by a weight function ``w`` that is
positive and non-decreasing on ``[0, inf)``.  The interesting regime is
``w`` regularly varying with index 1 but sub-linear, i.e. ``w(x) = x / ell(x)``
with ``ell`` slowly varying and unbounded.  Weights are needed in two
representations:

* direct: ``w(x)`` for moderate arguments (walk counts, assumption checks);
* log-domain: ``log w(e^L)`` as a function of ``L = log x``, which the
  calculus layer uses to evaluate ``w`` at points far beyond float range
  (arguments like ``W^{-1}(u)`` grow super-exponentially).

Built-in families::

    linear:c     w(x) = c*x + 1                       classical baseline, ell -> 1/c
    power:p      w(x) = (x+1)**p                      index p (p < 1: strongly sub-linear)
    polylog:a    w(x) = x*exp(-(log x)**a) for x >= e, constant 1 below   (0 < a < 1)
    critical     w(x) = x*exp(-log x/log log x) for x >= e^2, constant below
    table:path   monotone piecewise-linear through tabulated (x, w) points

The stitched families (polylog, critical) are evaluated as ``exp`` of their
log-domain form, so the stitch point is exact in floating point and nothing
overflows for any representable ``x``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "WeightSpec",
    "AssumptionReport",
    "linear_weight",
    "power_weight",
    "polylog_weight",
    "critical_weight",
    "table_weight",
    "parse_weight",
    "weight_config_str",
    "eval_w",
    "eval_w_log",
    "eval_ell",
    "eval_ell_log",
    "weight_int_table",
    "check_assumption",
]

_FAMILIES = ("linear", "power", "polylog", "critical", "table")

# stitch points of the flat-then-regularly-varying families, in L = log x
_POLYLOG_STITCH_L = 1.0    # x = e
_CRITICAL_STITCH_L = 2.0   # x = e^2


def _critical_low_log() -> float:
    # value of L - L/log(L) at the stitch L = 2
    return 2.0 - 2.0 / math.log(2.0)


@dataclass(frozen=True)
class WeightSpec:
    """Immutable description of a weight function.

    Parameters
    ----------
    family : str
        One of ``linear``, ``power``, ``polylog``, ``critical``, ``table``.
    params : tuple of float
        Family parameters: ``(c,)`` for linear, ``(p,)`` for power,
        ``(alpha,)`` for polylog, empty otherwise.
    table : tuple of (x, w) pairs
        Only for ``family="table"``; strictly ascending in x, non-decreasing
        in w, all values positive.
    domain_floor : float
        Smallest admissible argument (defaults to 0).
    low_value : float or None
        Override for the constant value left of the stitch point
        (polylog/critical only).  ``None`` keeps the continuous default.
    table_path : str or None
        Where a tabulated family was loaded from, kept for reporting only.
    """

    family: str
    params: tuple[float, ...] = ()
    table: tuple[tuple[float, float], ...] | None = None
    domain_floor: float = 0.0
    low_value: float | None = None
    table_path: str | None = None

    def __post_init__(self) -> None:
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown weight family {self.family!r}; expected one of {_FAMILIES}")
        if self.family == "linear":
            if len(self.params) != 1 or not self.params[0] > 0:
                raise ValueError("linear family needs a single slope parameter c > 0")
        elif self.family == "power":
            if len(self.params) != 1 or not self.params[0] > 0:
                raise ValueError("power family needs a single exponent parameter p > 0")
        elif self.family == "polylog":
            if len(self.params) != 1 or not 0.0 < self.params[0] < 1.0:
                raise ValueError("polylog family needs an exponent alpha in (0, 1)")
        elif self.family == "critical":
            if self.params:
                raise ValueError("critical family takes no parameters")
        elif self.family == "table":
            if not self.table or len(self.table) < 2:
                raise ValueError("table family needs at least two (x, w) points")
            xs = [p[0] for p in self.table]
            ws = [p[1] for p in self.table]
            if any(b <= a for a, b in zip(xs, xs[1:])):
                raise ValueError("table x-coordinates must be strictly ascending")
            if any(v <= 0 for v in ws):
                raise ValueError("table weights must be positive")
            if any(b < a for a, b in zip(ws, ws[1:])):
                raise ValueError("table weights must be non-decreasing")
        if self.low_value is not None and not self.low_value > 0:
            raise ValueError("low_value must be positive")

    # -- convenience -------------------------------------------------------

    @property
    def label(self) -> str:
        return weight_config_str(self)


def linear_weight(c: float = 1.0) -> WeightSpec:
    return WeightSpec("linear", (float(c),))


def power_weight(p: float) -> WeightSpec:
    return WeightSpec("power", (float(p),))


def polylog_weight(alpha: float) -> WeightSpec:
    return WeightSpec("polylog", (float(alpha),))


def critical_weight() -> WeightSpec:
    return WeightSpec("critical")


def table_weight(points, path: str | None = None) -> WeightSpec:
    pts = tuple((float(x), float(w)) for x, w in points)
    return WeightSpec("table", (), table=pts, table_path=path)


# ---------------------------------------------------------------------------
# config strings ("linear:1", "polylog:0.6", "table:points.csv", ...)
# ---------------------------------------------------------------------------

def parse_weight(text: str) -> WeightSpec:
    """Parse a weight config string into a WeightSpec.

    Accepted forms: ``linear:c``, ``power:p``, ``polylog:alpha``,
    ``critical``, ``table:path.csv`` (CSV with ascending ``x,w`` rows).
    """
    text = text.strip()
    name, _, arg = text.partition(":")
    name = name.lower()
    if name == "critical":
        if arg:
            raise ValueError(f"critical weight takes no parameter, got {text!r}")
        return critical_weight()
    if name in ("linear", "power", "polylog"):
        if not arg:
            raise ValueError(f"weight {name!r} needs a parameter, e.g. {name}:0.6")
        try:
            val = float(arg)
        except ValueError:
            raise ValueError(f"could not parse parameter {arg!r} in weight {text!r}") from None
        return WeightSpec(name, (val,))
    if name == "table":
        if not arg:
            raise ValueError("table weight needs a CSV path, e.g. table:points.csv")
        return _load_table(arg)
    raise ValueError(f"unknown weight config {text!r}; expected one of {_FAMILIES}")


def _load_table(path: str) -> WeightSpec:
    rows: list[tuple[float, float]] = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].lstrip().startswith("#"):
                continue
            try:
                rows.append((float(rec[0]), float(rec[1])))
            except ValueError:
                # tolerate a single header line
                if rows:
                    raise ValueError(f"bad table row {rec!r} in {path}") from None
    if len(rows) < 2:
        raise ValueError(f"table file {path} holds fewer than two points")
    return table_weight(rows, path=path)


def weight_config_str(spec: WeightSpec) -> str:
    if spec.family == "critical":
        return "critical"
    if spec.family == "table":
        return f"table:{spec.table_path or 'inline'}"
    return f"{spec.family}:{spec.params[0]:g}"


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _as_array(x):
    arr = np.asarray(x, dtype=np.float64)
    return arr, arr.ndim == 0


def eval_w_log(spec: WeightSpec, L) -> np.ndarray | float:
    """``log w(e^L)`` for real ``L`` (may be -inf, meaning x = 0).

    This is the overflow-safe representation: all families except ``table``
    admit a closed log-domain form valid for arbitrarily large ``L``.
    """
    arr, scalar = _as_array(L)
    if spec.family == "linear":
        c = spec.params[0]
        out = np.logaddexp(math.log(c) + arr, 0.0)
    elif spec.family == "power":
        p = spec.params[0]
        out = p * np.logaddexp(arr, 0.0)
    elif spec.family == "polylog":
        a = spec.params[0]
        low_log = 0.0 if spec.low_value is None else math.log(spec.low_value)
        out = np.full(arr.shape, low_log)
        m = arr >= _POLYLOG_STITCH_L
        Lm = arr[m]
        out[m] = Lm - Lm**a
    elif spec.family == "critical":
        low_log = _critical_low_log() if spec.low_value is None else math.log(spec.low_value)
        out = np.full(arr.shape, low_log)
        m = arr >= _CRITICAL_STITCH_L
        Lm = arr[m]
        out[m] = Lm - Lm / np.log(Lm)
    else:
        raise ValueError("log-domain evaluation is not available for tabulated weights")
    return float(out) if scalar else out


def eval_w(spec: WeightSpec, x) -> np.ndarray | float:
    """Evaluate the weight at ``x`` (scalar or array), ``x >= domain_floor``."""
    arr, scalar = _as_array(x)
    if np.any(arr < spec.domain_floor):
        bad = float(np.min(arr))
        raise ValueError(f"weight argument {bad} below domain floor {spec.domain_floor}")
    if spec.family == "linear":
        c = spec.params[0]
        out = c * arr + 1.0
    elif spec.family == "power":
        p = spec.params[0]
        out = (arr + 1.0) ** p
    elif spec.family in ("polylog", "critical"):
        with np.errstate(divide="ignore"):
            L = np.where(arr > 0.0, np.log(np.maximum(arr, 1e-300)), -np.inf)
        out = np.exp(eval_w_log(spec, L))
    else:  # table
        xs = np.array([p[0] for p in spec.table])
        ws = np.array([p[1] for p in spec.table])
        if np.any(arr < xs[0]) or np.any(arr > xs[-1]):
            raise ValueError(
                f"argument outside tabulated hull [{xs[0]}, {xs[-1]}]"
            )
        out = np.interp(arr, xs, ws)
    return float(out) if scalar else out


def eval_ell(spec: WeightSpec, x) -> np.ndarray | float:
    """Slowly varying part ``ell(x) = x / w(x)``; undefined at ``x = 0``."""
    arr, scalar = _as_array(x)
    if np.any(arr <= 0.0):
        raise ValueError("ell(x) = x/w(x) is only defined for x > 0")
    out = arr / eval_w(spec, arr)
    return float(out) if scalar else out


def eval_ell_log(spec: WeightSpec, L) -> np.ndarray | float:
    """``log ell(e^L) = L - log w(e^L)``, in closed per-family form.

    The naive subtraction ``L - eval_w_log(spec, L)`` cancels catastrophically
    once ``ell_log`` drops below the float resolution of ``L`` itself (for
    polylog that happens near ``L ~ 1e26``), so each family gets the
    analytically simplified form instead.
    """
    arr, scalar = _as_array(L)
    if spec.family == "linear":
        c = spec.params[0]
        # L - log(c e^L + 1) = -log(c + e^-L)
        out = -np.logaddexp(math.log(c), -arr)
    elif spec.family == "power":
        p = spec.params[0]
        # L - p log(e^L + 1), split by sign of L so nothing overflows
        out = np.empty_like(arr)
        pos = arr >= 0.0
        out[pos] = (1.0 - p) * arr[pos] - p * np.log1p(np.exp(-arr[pos]))
        out[~pos] = arr[~pos] - p * np.log1p(np.exp(arr[~pos]))
    elif spec.family == "polylog":
        a = spec.params[0]
        low_log = 0.0 if spec.low_value is None else math.log(spec.low_value)
        out = np.asarray(arr - low_log)
        m = arr >= _POLYLOG_STITCH_L
        out[m] = arr[m] ** a
    elif spec.family == "critical":
        low_log = _critical_low_log() if spec.low_value is None else math.log(spec.low_value)
        out = np.asarray(arr - low_log)
        m = arr >= _CRITICAL_STITCH_L
        out[m] = arr[m] / np.log(arr[m])
    else:
        raise ValueError("log-domain evaluation is not available for tabulated weights")
    return float(out) if scalar else out


def weight_int_table(spec: WeightSpec, n_max: int) -> np.ndarray:
    """``w`` tabulated at integer counts ``0..n_max`` (walk engines index this)."""
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    return np.asarray(eval_w(spec, np.arange(n_max + 1, dtype=np.float64)))


def stitch_points(spec: WeightSpec) -> tuple[float, ...]:
    """x-coordinates where w is continuous but not smooth.

    Quadrature and interpolation grids place nodes exactly here; the branch
    tests in eval_w are exact at these floats, so cells on either side see a
    smooth integrand.
    """
    if spec.family == "polylog":
        return (math.e,)
    if spec.family == "critical":
        return (math.exp(2.0),)
    if spec.family == "table":
        return tuple(x for x, _ in spec.table[1:-1])
    return ()


# ---------------------------------------------------------------------------
# assumption diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AssumptionReport:
    """Diagnostic summary; informative only, nothing here throws.

    ``slow_variation_ratio`` is ``max |ell(2x)/ell(x) - 1|`` over the top
    decade of the probe grid: near 0 for genuinely slowly varying ``ell``,
    order 1 for weights like ``power:2`` that break the sub-linear regime.
    """

    monotone: bool
    slow_variation_ratio: float
    ell_eventually_nondecreasing: bool
    grid_top: float

    def as_dict(self) -> dict:
        return {
            "monotone": self.monotone,
            "slow_variation_ratio": self.slow_variation_ratio,
            "ell_eventually_nondecreasing": self.ell_eventually_nondecreasing,
            "grid_top": self.grid_top,
        }


def check_assumption(spec: WeightSpec, grid_top: float = 1e6) -> AssumptionReport:
    """Probe monotonicity and slow variation on a geometric grid up to grid_top."""
    if grid_top < 1e3:
        raise ValueError("grid_top must be at least 1e3")
    if spec.family == "table":
        grid_top = min(grid_top, spec.table[-1][0])
    lo = max(spec.domain_floor, 1e-2)
    if spec.family == "table":
        lo = max(lo, spec.table[0][0])

    # monotonicity: small integers plus a geometric sweep
    small = np.arange(0.0, 33.0)
    small = small[(small >= spec.domain_floor)]
    if spec.family == "table":
        small = small[(small >= spec.table[0][0]) & (small <= spec.table[-1][0])]
    sweep = np.geomspace(lo, grid_top, 513)
    xs = np.unique(np.concatenate([small, sweep]))
    wv = np.asarray(eval_w(spec, xs))
    monotone = bool(np.all(np.diff(wv) >= -1e-12 * wv[1:]))

    # slow variation over the top decade (need 2x inside the grid)
    xt = np.geomspace(grid_top / 10.0, grid_top / 2.0, 129)
    ratio = np.asarray(eval_ell(spec, 2.0 * xt)) / np.asarray(eval_ell(spec, xt))
    slow_ratio = float(np.max(np.abs(ratio - 1.0)))

    xe = np.geomspace(grid_top / 10.0, grid_top, 129)
    ell = np.asarray(eval_ell(spec, xe))
    ell_nondec = bool(np.all(np.diff(ell) >= -1e-12 * ell[1:]))

    return AssumptionReport(
        monotone=monotone,
        slow_variation_ratio=slow_ratio,
        ell_eventually_nondecreasing=ell_nondec,
        grid_top=float(grid_top),
    )
