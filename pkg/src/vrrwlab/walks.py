"""Reinforced nearest-neighbour walks on the integers.

The laboratory simulates one walk law and five comparison processes, all
built on the same construction: when the walk sits at site ``x`` with site
local time ``i`` (counting the current visit and any initial count), it
reads the uniform keyed ``(x, i)`` from a shared random field and moves
left when the uniform is at most the kind's left-probability.

Kinds
-----
``vrrw_z``
    The walk of interest on all of Z: jumps left with probability
    ``w(Z(x-1)) / (w(Z(x-1)) + w(Z(x+1)))``.
``reflected_vrrw``
    Same kernel with a reflecting floor (default site -1, forced right),
    and optionally a reflecting ceiling (forced left) for runs confined to
    a finite interval such as [0, 4].
``tilde_walk``
    Mixed site/edge reinforcement on the half-line: left weight from the
    site count ``Z(x-1)``, right weight from the oriented-edge count
    ``N(x, x+1)``; floor -1.
``hat_walk``
    Tilde kernel with the rightward push strengthened: the origin edge
    count is bumped to ``N + f(N)`` and every other right edge count is
    scaled to ``(1+eps) N``; floor -1.
``hat_restricted``
    The hat walk additionally reflected at a ceiling ``L``.
``breve_walk``
    Tilde kernel on [0, inf) except at the origin, where the walk holds
    with probability ``1-gamma`` and steps right with probability
    ``gamma`` (it never moves to -1); the origin rule consumes one uniform
    per visit and steps right exactly when ``U >= 1-gamma``.

Ledger convention: ``Z_n(x)`` counts visits including time 0 on top of any
initial count, and ``N_n(x, x+1)`` counts oriented right-jumps before time
``n``; consequently the time-0 state already differs from the initial
state at the origin.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import engine
from .weights import WeightSpec, eval_w, weight_int_table

__all__ = [
    "VRRW_Z",
    "REFLECTED_VRRW",
    "TILDE_WALK",
    "HAT_WALK",
    "HAT_RESTRICTED",
    "BREVE_WALK",
    "LedgerState",
    "trivial_state",
    "WalkKind",
    "vrrw_z",
    "reflected_vrrw",
    "tilde_walk",
    "hat_walk",
    "hat_restricted",
    "breve_walk",
    "RandomField",
    "WalkRun",
    "init_run",
    "prob_left",
    "kernel_probs",
    "step",
    "run_walk",
    "simulate",
    "enumerate_exact",
    "endpoint_law",
    "total_variation",
    "symmetrize_state",
    "make_tables",
]

VRRW_Z = "vrrw_z"
REFLECTED_VRRW = "reflected_vrrw"
TILDE_WALK = "tilde_walk"
HAT_WALK = "hat_walk"
HAT_RESTRICTED = "hat_restricted"
BREVE_WALK = "breve_walk"

_VARIANTS = (VRRW_Z, REFLECTED_VRRW, TILDE_WALK, HAT_WALK, HAT_RESTRICTED, BREVE_WALK)

_KIND_CODES = {
    VRRW_Z: engine.K_VRRW,
    REFLECTED_VRRW: engine.K_REFLECTED,
    TILDE_WALK: engine.K_TILDE,
    HAT_WALK: engine.K_HAT,
    HAT_RESTRICTED: engine.K_HAT_RESTRICTED,
    BREVE_WALK: engine.K_BREVE,
}

_COUNT_CAP = 2**63 - 1
_SITE_CAP = 2**31 - 2  # traces are int32


# ---------------------------------------------------------------------------
# ledger states
# ---------------------------------------------------------------------------

@dataclass
class LedgerState:
    """Sparse site/edge local-time configuration.

    ``z[x]`` is the site count at ``x`` and ``n_edge[x]`` the count of the
    oriented edge ``(x, x+1)``.  A valid state satisfies
    ``n_edge[x] <= z[x+1]`` for every ``x``.  The origin is always site 0.
    """

    z: dict[int, int] = field(default_factory=dict)
    n_edge: dict[int, int] = field(default_factory=dict)
    origin: int = 0

    def validate(self) -> None:
        if self.origin != 0:
            raise ValueError("walks start at the origin; origin must be 0")
        for name, table in (("z", self.z), ("n_edge", self.n_edge)):
            for x, c in table.items():
                if not isinstance(x, int) or not isinstance(c, (int, np.integer)):
                    raise ValueError(f"{name} must map int sites to int counts")
                if abs(x) > _SITE_CAP:
                    raise ValueError(f"site {x} outside the supported range")
                if c < 0:
                    raise ValueError(f"negative count {name}[{x}] = {c}")
        for x, c in self.n_edge.items():
            if c > self.z.get(x + 1, 0):
                raise ValueError(
                    f"edge count n_edge[{x}] = {c} exceeds site count "
                    f"z[{x + 1}] = {self.z.get(x + 1, 0)}")

    def copy(self) -> "LedgerState":
        return LedgerState(dict(self.z), dict(self.n_edge), self.origin)

    def prune(self) -> "LedgerState":
        """Drop explicit zeros (counts default to zero everywhere)."""
        self.z = {x: c for x, c in self.z.items() if c}
        self.n_edge = {x: c for x, c in self.n_edge.items() if c}
        return self

    def support(self) -> tuple[int, int]:
        sites = [0]
        sites += [x for x, c in self.z.items() if c]
        for x, c in self.n_edge.items():
            if c:
                sites += [x, x + 1]
        return min(sites), max(sites)

    def total_count(self) -> int:
        return sum(self.z.values())

    def is_reachable(self) -> bool:
        """Support of ``n_edge`` is an interval [a, b-1] with a <= 0 <= b and
        ``z(x) = n_edge(x) + n_edge(x-1)`` everywhere."""
        edges = sorted(x for x, c in self.n_edge.items() if c)
        if edges:
            a, top = edges[0], edges[-1]
            b = top + 1
            if a > 0 or b < 0:
                return False
            if edges != list(range(a, b)):
                return False
        sites = set(self.z) | {x for x in self.n_edge} | {x + 1 for x in self.n_edge}
        ne = self.n_edge
        return all(
            self.z.get(x, 0) == ne.get(x, 0) + ne.get(x - 1, 0) for x in sites
        )

    def is_symmetric(self) -> bool:
        """``z(x) = z(-x)`` and ``n_edge(x) = n_edge(-x-1)`` for x >= 0."""
        for x in set(self.z):
            if self.z.get(x, 0) != self.z.get(-x, 0):
                return False
        for x in set(self.n_edge):
            if self.n_edge.get(x, 0) != self.n_edge.get(-x - 1, 0):
                return False
        return True

    # JSON round trip: {"z": {site: count}, "n": {site: count}}
    def to_json_dict(self) -> dict:
        return {
            "z": {str(x): int(c) for x, c in sorted(self.z.items()) if c},
            "n": {str(x): int(c) for x, c in sorted(self.n_edge.items()) if c},
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "LedgerState":
        state = cls(
            {int(x): int(c) for x, c in data.get("z", {}).items()},
            {int(x): int(c) for x, c in data.get("n", {}).items()},
        )
        state.validate()
        return state

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def load(cls, path) -> "LedgerState":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def trivial_state() -> LedgerState:
    return LedgerState()


# ---------------------------------------------------------------------------
# walk kinds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WalkKind:
    """A walk law: variant, its weight function, and kind parameters.

    The weight travels with the kind because every kernel is a ratio of
    weight values; the remaining fields are only meaningful for specific
    variants (``epsilon``/``f`` for the hat kinds, ``L`` for the restricted
    hat, ``gamma`` for the breve walk, ``floor``/``ceiling`` for reflected
    range control).
    """

    variant: str
    weight: WeightSpec
    epsilon: float | None = None
    f: object | None = None
    L: int | None = None
    gamma: float | None = None
    floor: int | None = None
    ceiling: int | None = None

    def __post_init__(self) -> None:
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown walk variant {self.variant!r}")
        if not isinstance(self.weight, WeightSpec):
            raise ValueError("weight must be a WeightSpec")
        if self.variant in (HAT_WALK, HAT_RESTRICTED):
            if self.epsilon is None or not self.epsilon > 0:
                raise ValueError("hat walks need epsilon > 0")
            if self.f is None or not callable(self.f):
                raise ValueError("hat walks need the envelope function f "
                                 "(built by operators.build_f_eta)")
        elif self.epsilon is not None or self.f is not None:
            raise ValueError("epsilon/f only apply to hat walks")
        if self.variant == HAT_RESTRICTED:
            if self.L is None or int(self.L) < 1:
                raise ValueError("restricted hat walk needs a ceiling L >= 1")
            object.__setattr__(self, "L", int(self.L))
        elif self.L is not None:
            raise ValueError("L only applies to the restricted hat walk")
        if self.variant == BREVE_WALK:
            if self.gamma is None or not 0.0 < self.gamma < 0.5:
                raise ValueError("breve walk needs gamma in (0, 1/2)")
        elif self.gamma is not None:
            raise ValueError("gamma only applies to the breve walk")
        if self.variant in (REFLECTED_VRRW, TILDE_WALK, HAT_WALK, HAT_RESTRICTED):
            if self.floor is None:
                object.__setattr__(self, "floor", -1)
        elif self.floor is not None:
            raise ValueError(f"{self.variant} does not take a floor")
        if self.ceiling is not None:
            if self.variant != REFLECTED_VRRW:
                raise ValueError("ceiling only applies to reflected_vrrw "
                                 "(the restricted hat walk uses L)")
            if self.ceiling <= self.floor:
                raise ValueError("ceiling must exceed the floor")
        if self.variant == REFLECTED_VRRW and self.floor > 0:
            raise ValueError("the reflecting floor may not exceed the origin")

    # effective boundaries --------------------------------------------------

    @property
    def floor_site(self) -> int | None:
        return self.floor

    @property
    def ceiling_site(self) -> int | None:
        if self.variant == HAT_RESTRICTED:
            return self.L
        return self.ceiling

    def position_ok(self, position: int) -> bool:
        if self.variant == BREVE_WALK:
            return position >= 0
        lo = self.floor if self.floor is not None else None
        hi = self.ceiling_site
        if lo is not None and position < lo:
            return False
        if hi is not None and position > hi:
            return False
        return True

    @property
    def label(self) -> str:
        bits = [self.variant, self.weight.label]
        if self.variant in (HAT_WALK, HAT_RESTRICTED):
            bits.append(f"eps={self.epsilon:g}")
        if self.variant == HAT_RESTRICTED:
            bits.append(f"L={self.L}")
        if self.variant == BREVE_WALK:
            bits.append(f"gamma={self.gamma:g}")
        if self.variant == REFLECTED_VRRW and (self.floor != -1 or self.ceiling is not None):
            hi = "inf" if self.ceiling is None else str(self.ceiling)
            bits.append(f"range=[{self.floor},{hi}]")
        return "[".join(bits[:2]) + "]" + (" " + " ".join(bits[2:]) if bits[2:] else "")


def vrrw_z(weight: WeightSpec) -> WalkKind:
    return WalkKind(VRRW_Z, weight)


def reflected_vrrw(weight: WeightSpec, floor: int = -1,
                   ceiling: int | None = None) -> WalkKind:
    return WalkKind(REFLECTED_VRRW, weight, floor=floor, ceiling=ceiling)


def tilde_walk(weight: WeightSpec) -> WalkKind:
    return WalkKind(TILDE_WALK, weight)


def hat_walk(weight: WeightSpec, epsilon: float, f) -> WalkKind:
    return WalkKind(HAT_WALK, weight, epsilon=float(epsilon), f=f)


def hat_restricted(weight: WeightSpec, L: int, epsilon: float, f) -> WalkKind:
    return WalkKind(HAT_RESTRICTED, weight, epsilon=float(epsilon), f=f, L=L)


def breve_walk(weight: WeightSpec, gamma: float) -> WalkKind:
    return WalkKind(BREVE_WALK, weight, gamma=float(gamma))


# ---------------------------------------------------------------------------
# random field
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RandomField:
    """Counter-based uniforms ``U_i^x``: one value per (site, visit index),
    identical however often and in whatever order it is queried."""

    seed: int

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def uniform(self, site: int, visit: int) -> float:
        if visit < 1:
            raise ValueError("visit indices start at 1")
        return engine.field_uniform(self.seed, site, visit)


# ---------------------------------------------------------------------------
# transition kernels
# ---------------------------------------------------------------------------

def _edge_weight(kind: WalkKind, position: int, m: int) -> float:
    """Weight applied to the rightward drive statistic at ``position``."""
    w = kind.weight
    if kind.variant in (HAT_WALK, HAT_RESTRICTED):
        if position == 0:
            return float(eval_w(w, m + float(kind.f(m))))
        return float(eval_w(w, (1.0 + kind.epsilon) * m))
    return float(eval_w(w, m))


def prob_left(kind: WalkKind, ledger: LedgerState, position: int) -> float:
    """Exact left-transition probability of ``kind`` at ``position``.

    Reflected kinds return 0 at their floor (forced right) and 1 at their
    ceiling (forced left).  The breve walk at the origin has no left move;
    the value returned there is its *hold* probability ``1 - gamma`` (the
    kernel is hold/right, see :func:`kernel_probs`).
    """
    if not kind.position_ok(position):
        raise ValueError(f"position {position} outside the range of {kind.variant}")
    if kind.variant == BREVE_WALK and position == 0:
        return 1.0 - kind.gamma
    if kind.floor is not None and position == kind.floor:
        return 0.0
    if kind.ceiling_site is not None and position == kind.ceiling_site:
        return 1.0
    a = float(eval_w(kind.weight, ledger.z.get(position - 1, 0)))
    if kind.variant in (VRRW_Z, REFLECTED_VRRW):
        b = float(eval_w(kind.weight, ledger.z.get(position + 1, 0)))
    else:
        b = _edge_weight(kind, position, ledger.n_edge.get(position, 0))
    return a / (a + b)


def kernel_probs(kind: WalkKind, ledger: LedgerState, position: int) -> dict[int, float]:
    """Outgoing kernel as ``{target: probability}``; sums to 1 exactly."""
    if kind.variant == BREVE_WALK and position == 0:
        return {0: 1.0 - kind.gamma, 1: kind.gamma}
    p = prob_left(kind, ledger, position)
    if p == 0.0:
        return {position + 1: 1.0}
    if p == 1.0:
        return {position - 1: 1.0}
    return {position - 1: p, position + 1: 1.0 - p}


# ---------------------------------------------------------------------------
# runs
# ---------------------------------------------------------------------------

@dataclass
class WalkRun:
    """A walk trajectory with its evolving ledger.

    ``ledger`` holds the time-``step_count`` local times (the origin's
    time-0 visit included), ``trace`` the positions ``X_0..X_n``.  Hitting
    clocks are derived from the trace on demand.
    """

    kind: WalkKind
    initial: LedgerState
    ledger: LedgerState
    position: int
    step_count: int
    seed: int | None = None
    trace: object = None  # list[int] while stepping, np.ndarray after simulate
    rows: object = None   # optional forensic (visit, z_left, z_right) arrays

    def trace_array(self) -> np.ndarray:
        return np.asarray(self.trace, dtype=np.int64)

    def sigma(self, x: int, k: int) -> int | None:
        """First time ``n`` with ``Z_n(x) = k``, or None within this horizon."""
        base = self.initial.z.get(x, 0)
        if k <= base:
            return 0 if k == base else None
        hits = np.flatnonzero(self.trace_array() == x)
        idx = k - base - 1
        return int(hits[idx]) if idx < hits.size else None

    def local_time(self, x: int) -> int:
        return self.ledger.z.get(x, 0)

    def range_seen(self) -> tuple[int, int]:
        t = self.trace_array()
        return int(t.min()), int(t.max())


def init_run(kind: WalkKind, initial: LedgerState | None = None,
             seed: int | None = None) -> WalkRun:
    """Time-0 run: the ledger is the initial state with the origin's count
    incremented (the walk starts at 0 and time 0 counts as a visit)."""
    initial = trivial_state() if initial is None else initial
    initial.validate()
    ledger = initial.copy()
    ledger.z[0] = ledger.z.get(0, 0) + 1
    return WalkRun(kind=kind, initial=initial.copy(), ledger=ledger,
                   position=0, step_count=0, seed=seed, trace=[0])


def step(run: WalkRun, field) -> WalkRun:
    """Advance one step using the uniform keyed by (position, visit count).

    Moves left exactly when ``U <= prob_left`` — except the breve origin,
    which partitions [0, 1] into hold / right and steps right exactly when
    ``U >= 1 - gamma``.
    """
    pos = run.position
    visit = run.ledger.z[pos]
    u = field.uniform(pos, visit)
    if run.kind.variant == BREVE_WALK and pos == 0:
        nxt = 1 if u >= 1.0 - run.kind.gamma else 0
    else:
        nxt = pos - 1 if u <= prob_left(run.kind, run.ledger, pos) else pos + 1
    if nxt == pos + 1:
        run.ledger.n_edge[pos] = run.ledger.n_edge.get(pos, 0) + 1
    run.ledger.z[nxt] = run.ledger.z.get(nxt, 0) + 1
    run.position = nxt
    run.step_count += 1
    if isinstance(run.trace, list):
        run.trace.append(nxt)
    else:
        run.trace = np.append(run.trace, nxt)
    return run


# ---------------------------------------------------------------------------
# fast driver
# ---------------------------------------------------------------------------

def make_tables(kind: WalkKind, cap: int):
    """Weight lookup tables by integer count: (site, right-edge, origin-edge).

    ``cap`` must bound every count the run can reach.  The hat kinds get
    their perturbed right-edge tables ``w((1+eps) m)`` and ``w(m + f(m))``;
    other kinds reuse the plain table, so the arrays may alias.
    """
    w_site = np.ascontiguousarray(weight_int_table(kind.weight, cap))
    if kind.variant in (HAT_WALK, HAT_RESTRICTED):
        m = np.arange(cap + 1, dtype=np.float64)
        w_edge = np.ascontiguousarray(eval_w(kind.weight, (1.0 + kind.epsilon) * m))
        w_edge0 = np.ascontiguousarray(eval_w(kind.weight, m + np.asarray(kind.f(m), dtype=np.float64)))
        return w_site, w_edge, w_edge0
    return w_site, w_site, w_site


def _engine_args(kind: WalkKind) -> tuple[int, float, int, int]:
    code = _KIND_CODES[kind.variant]
    gamma = kind.gamma if kind.gamma is not None else 0.0
    if kind.variant == BREVE_WALK:
        floor = engine.NO_FLOOR  # the origin rule already blocks moves to -1
    else:
        floor = kind.floor if kind.floor is not None else engine.NO_FLOOR
    hi = kind.ceiling_site
    ceiling = hi if hi is not None else engine.NO_CEILING
    return code, gamma, floor, ceiling


def _check_capacity(initial: LedgerState, n_steps: int) -> int:
    top = max(initial.z.values(), default=0)
    cap = top + n_steps + 1
    if cap >= _COUNT_CAP:
        raise OverflowError("local-time counters are 64-bit; horizon too large")
    return cap


def run_walk(kind: WalkKind, initial: LedgerState | None, seed: int,
             n_steps: int, record: bool = False, tables=None):
    """Simulate ``n_steps`` steps with the fast kernel.

    Returns the finished :class:`WalkRun` (trace as an int32 array); with
    ``record=True`` also attaches, as ``run.rows``, the per-time-index
    forensic arrays ``(visit, z_left, z_right)`` used by the coupling
    layer.  ``tables`` may be passed to amortize table construction over
    many seeds.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    initial = trivial_state() if initial is None else initial
    initial.validate()
    cap = _check_capacity(initial, n_steps)
    if tables is None:
        tables = make_tables(kind, cap)
    elif tables[0].shape[0] < cap + 1:
        raise ValueError("supplied tables are too short for this horizon")
    code, gamma, floor, ceiling = _engine_args(kind)
    window = engine.make_window(initial.z, initial.n_edge)
    window.z[window.offset] += 1  # time-0 visit at the origin
    trace, window, pos, rows = engine.run_window(
        code, gamma, floor, ceiling, window, tables, n_steps, seed, record)
    lo = -window.offset
    z = {lo + i: int(c) for i, c in enumerate(window.z) if c}
    ne = {lo + i: int(c) for i, c in enumerate(window.ne) if c}
    run = WalkRun(kind=kind, initial=initial.copy(),
                  ledger=LedgerState(z, ne), position=int(pos),
                  step_count=int(n_steps), seed=seed, trace=trace)
    run.rows = rows
    return run


def simulate(kind: WalkKind, initial: LedgerState | None, field: RandomField,
             n_steps: int, probes=(), checkpoints_per_decade: int = 8):
    """Run ``n_steps`` steps and collect diagnostics at geometric times.

    Returns ``(run, series)``.  ``n_steps = 0`` is the time-0 boundary: the
    ledger is the initial state with the origin count incremented.  Probes
    are sites whose local times (and jump-sum diagnostics) are tracked.
    """
    from .experiments import compute_diagnostics

    run = run_walk(kind, initial, field.seed, n_steps)
    series = compute_diagnostics(run, probes=probes,
                                 checkpoints_per_decade=checkpoints_per_decade)
    return run, series


# ---------------------------------------------------------------------------
# exact enumeration (brute-force oracle)
# ---------------------------------------------------------------------------

def enumerate_exact(kind: WalkKind, initial: LedgerState | None,
                    n_steps: int) -> dict[tuple[int, ...], float]:
    """Exact law of the first ``n_steps`` steps as {trajectory: probability}.

    Trajectories are position tuples ``(X_0, ..., X_n)``; probabilities are
    products of kernel values, so the total mass is 1 up to float rounding.
    Horizons above 14 are rejected (the tree has up to 2^n leaves).
    """
    if not 0 <= n_steps <= 14:
        raise ValueError("enumerate_exact supports horizons 0..14")
    initial = trivial_state() if initial is None else initial
    initial.validate()
    ledger = initial.copy()
    ledger.z[0] = ledger.z.get(0, 0) + 1
    paths: dict[tuple[int, ...], float] = {}

    def recurse(ledger: LedgerState, pos: int, left: int,
                prob: float, path: tuple[int, ...]) -> None:
        if left == 0:
            paths[path] = prob
            return
        for nxt, p in kernel_probs(kind, ledger, pos).items():
            if p == 0.0:
                continue
            child = ledger.copy()
            if nxt == pos + 1:
                child.n_edge[pos] = child.n_edge.get(pos, 0) + 1
            child.z[nxt] = child.z.get(nxt, 0) + 1
            recurse(child, nxt, left - 1, prob * p, path + (nxt,))

    recurse(ledger, 0, n_steps, 1.0, (0,))
    return paths


def state_at(run: WalkRun, t: int) -> LedgerState:
    """Ledger at time ``t`` reconstructed from the trace (counts include
    the visits at times 0..t, edge jumps before time t)."""
    if not 0 <= t <= run.step_count:
        raise ValueError(f"time {t} outside the run horizon {run.step_count}")
    trace = run.trace_array()
    state = run.initial.copy()
    sites, counts = np.unique(trace[:t + 1], return_counts=True)
    for x, c in zip(sites, counts):
        state.z[int(x)] = state.z.get(int(x), 0) + int(c)
    if t > 0:
        frm, to = trace[:t], trace[1:t + 1]
        rights = frm[to == frm + 1]
        sites, counts = np.unique(rights, return_counts=True)
        for x, c in zip(sites, counts):
            state.n_edge[int(x)] = state.n_edge.get(int(x), 0) + int(c)
    return state.prune()


def endpoint_law(paths: dict[tuple[int, ...], float]) -> dict[int, float]:
    law: dict[int, float] = {}
    for path, p in paths.items():
        law[path[-1]] = law.get(path[-1], 0.0) + p
    return dict(sorted(law.items()))


def total_variation(law_a: dict[int, float], law_b: dict[int, float]) -> float:
    keys = set(law_a) | set(law_b)
    return 0.5 * sum(abs(law_a.get(k, 0.0) - law_b.get(k, 0.0)) for k in keys)


# ---------------------------------------------------------------------------
# symmetrization
# ---------------------------------------------------------------------------

def symmetrize_state(state: LedgerState) -> LedgerState:
    """Mirror a right-leaning reachable state into a symmetric one.

    The input must be reachable, supported on [-1, b], and satisfy
    ``n_edge(0) >= n_edge(-1)``.  Edge counts at ``x >= 0`` are kept and
    mirrored onto ``x < 0`` via ``n(x, x+1) = n(-x-1, -x)``; site counts
    are rebuilt as ``z(x) = n(x, x+1) + n(x-1, x)``, which keeps the state
    reachable and makes it symmetric by construction.
    """
    if not state.is_reachable():
        raise ValueError("symmetrize_state needs a reachable state")
    lo, _ = state.support()
    if lo < -1:
        raise ValueError("state must be supported on [-1, b]")
    if state.n_edge.get(0, 0) < state.n_edge.get(-1, 0):
        raise ValueError("state must satisfy n_edge(0) >= n_edge(-1)")
    ne: dict[int, int] = {}
    for x, c in state.n_edge.items():
        if x >= 0 and c:
            ne[x] = c
            ne[-x - 1] = c
    z: dict[int, int] = {}
    for x in set(ne) | {x + 1 for x in ne}:
        c = ne.get(x, 0) + ne.get(x - 1, 0)
        if c:
            z[x] = c
    out = LedgerState(z, ne)
    out.validate()
    assert out.is_symmetric() and out.is_reachable()
    return out
