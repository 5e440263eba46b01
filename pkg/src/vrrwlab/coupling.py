"""Pathwise comparison of two walks driven by the same uniform field.

Both walks consume the uniform attached to ``(site, visit-count)`` keys, so
a step taken by one walk never perturbs the randomness seen by the other:
the comparisons below are order-independent by construction.

Terminology used throughout:

* a *co-finite pair* ``(x, k)`` is a site/visit-count pair reached by both
  walks within the horizon; ``sigma(x, k)`` is the (walk-local) time of
  that arrival;
* the *left* walk is the one expected to stay weakly to the left: at every
  co-finite pair it should have accumulated at least as many visits to
  ``x - 1`` and at most as many to ``x + 1`` as the right walk, and its
  right-jumps out of ``(x, k)`` should force right-jumps of the right walk.

Jump implications are only checked when both walks have a defined next
step; a co-finite pair sitting at either walk's final time index is
counted as *incomparable* rather than silently passed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .engine import field_uniform
from .walks import (
    HAT_RESTRICTED,
    HAT_WALK,
    LedgerState,
    WalkKind,
    WalkRun,
    prob_left,
    run_walk,
    state_at,
    trivial_state,
)

_VISIT_LIMIT = 1 << 32  # row-join keys pack the visit count into 32 bits


# ---------------------------------------------------------------------------
# paired simulation
# ---------------------------------------------------------------------------

@dataclass
class CouplingRecord:
    """Outcome of one paired run.

    ``violations`` lists every broken comparison (capped at
    ``max_violations`` entries; ``n_violations`` counts all of them) and
    ``event_samples`` keeps a few evenly spaced co-finite rows as
    witnesses of the local-time sandwich.  Traces are kept in memory for
    replay but are excluded from the JSON form.
    """

    left_label: str
    right_label: str
    seed: int
    n_steps: int
    initial: LedgerState
    n_matched: int = 0
    n_jump_checked: int = 0
    n_incomparable: int = 0
    n_violations: int = 0
    violations: list = field(default_factory=list)
    event_samples: list = field(default_factory=list)
    final_left: LedgerState | None = None
    final_right: LedgerState | None = None
    left_trace: object = None
    right_trace: object = None

    @property
    def ordered(self) -> bool:
        """True when every recorded comparison held (no tolerance)."""
        return self.n_violations == 0

    def to_json_dict(self) -> dict:
        return {
            "left": self.left_label,
            "right": self.right_label,
            "seed": int(self.seed),
            "n_steps": int(self.n_steps),
            "initial": self.initial.to_json_dict(),
            "n_matched": int(self.n_matched),
            "n_jump_checked": int(self.n_jump_checked),
            "n_incomparable": int(self.n_incomparable),
            "n_violations": int(self.n_violations),
            "ordered": self.ordered,
            "violations": self.violations,
            "event_samples": self.event_samples,
            "final_left": self.final_left.to_json_dict() if self.final_left else None,
            "final_right": self.final_right.to_json_dict() if self.final_right else None,
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _row_keys(trace: np.ndarray, visits: np.ndarray) -> np.ndarray:
    """Pack (site, visit-count) per time index into sortable int64 keys."""
    if visits.size and int(visits.max()) >= _VISIT_LIMIT:
        raise OverflowError("visit counts exceed the 32-bit row-join key budget")
    return (trace.astype(np.int64) + (1 << 31)) * _VISIT_LIMIT + visits


def paired_simulate(left_kind: WalkKind, right_kind: WalkKind,
                    initial: LedgerState | None = None, seed: int = 0,
                    n_steps: int = 10_000, max_violations: int = 64,
                    n_event_samples: int = 32) -> CouplingRecord:
    """Run both walks on the shared uniform field and compare them.

    For every co-finite pair ``(x, k)`` the record checks the two
    local-time inequalities (left walk has visited ``x - 1`` at least as
    often and ``x + 1`` at most as often) and, when both walks still have
    a next step, the jump implication (left walk moves right => right
    walk moves right).  All checks are exact; there are no tolerances.
    """
    if initial is None:
        initial = trivial_state()
    run_l = run_walk(left_kind, initial, seed, n_steps, record=True)
    run_r = run_walk(right_kind, initial, seed, n_steps, record=True)
    return compare_runs(run_l, run_r, max_violations=max_violations,
                        n_event_samples=n_event_samples)


def compare_runs(run_l: WalkRun, run_r: WalkRun, max_violations: int = 64,
                 n_event_samples: int = 32) -> CouplingRecord:
    """Build a :class:`CouplingRecord` from two already-recorded runs."""
    if run_l.rows is None or run_r.rows is None:
        raise ValueError("both runs must be recorded (record=True)")
    if run_l.initial.to_json_dict() != run_r.initial.to_json_dict():
        raise ValueError("paired runs must share the initial state")
    trace_l, trace_r = run_l.trace_array(), run_r.trace_array()
    vis_l, zl_l, zr_l = run_l.rows
    vis_r, zl_r, zr_r = run_r.rows

    keys_l = _row_keys(trace_l, vis_l)
    keys_r = _row_keys(trace_r, vis_r)
    _, idx_l, idx_r = np.intersect1d(keys_l, keys_r, assume_unique=True,
                                     return_indices=True)

    record = CouplingRecord(
        left_label=run_l.kind.label, right_label=run_r.kind.label,
        seed=run_l.seed if run_l.seed is not None else -1,
        n_steps=run_l.step_count, initial=run_l.initial,
        final_left=run_l.ledger, final_right=run_r.ledger,
        left_trace=trace_l, right_trace=trace_r)
    record.n_matched = int(idx_l.size)
    if idx_l.size == 0:
        return record

    sites = trace_l[idx_l].astype(np.int64)
    visits = vis_l[idx_l]

    # Local-time sandwich at each co-finite pair.
    bad_left = zl_l[idx_l] < zl_r[idx_r]
    bad_right = zr_l[idx_l] > zr_r[idx_r]

    # Jump implication; rows at either horizon edge have no defined jump.
    n_l, n_r = run_l.step_count, run_r.step_count
    has_jump = (idx_l < n_l) & (idx_r < n_r)
    record.n_incomparable = int(idx_l.size - has_jump.sum())
    record.n_jump_checked = int(has_jump.sum())
    jump_l = np.zeros(idx_l.size, dtype=np.int64)
    jump_r = np.zeros(idx_l.size, dtype=np.int64)
    jump_l[has_jump] = (trace_l[idx_l[has_jump] + 1]
                        - trace_l[idx_l[has_jump]]).astype(np.int64)
    jump_r[has_jump] = (trace_r[idx_r[has_jump] + 1]
                        - trace_r[idx_r[has_jump]]).astype(np.int64)
    bad_jump = has_jump & (jump_l == 1) & (jump_r != 1)

    bad_any = bad_left | bad_right | bad_jump
    record.n_violations = int(bad_any.sum())
    for j in np.flatnonzero(bad_any)[:max_violations]:
        conditions = []
        if bad_left[j]:
            conditions.append("left_neighbour_count")
        if bad_right[j]:
            conditions.append("right_neighbour_count")
        if bad_jump[j]:
            conditions.append("right_jump_implication")
        record.violations.append({
            "conditions": conditions,
            "site": int(sites[j]),
            "visit": int(visits[j]),
            "time_left": int(idx_l[j]),
            "time_right": int(idx_r[j]),
            "z_left_of_low": int(zl_l[idx_l[j]]),
            "z_left_of_high": int(zl_r[idx_r[j]]),
            "z_right_of_low": int(zr_l[idx_l[j]]),
            "z_right_of_high": int(zr_r[idx_r[j]]),
            "jump_low": int(jump_l[j]) if has_jump[j] else None,
            "jump_high": int(jump_r[j]) if has_jump[j] else None,
        })

    if n_event_samples > 0:
        picks = np.unique(np.linspace(0, idx_l.size - 1,
                                      min(n_event_samples, idx_l.size),
                                      dtype=np.int64))
        for j in picks:
            record.event_samples.append({
                "site": int(sites[j]),
                "visit": int(visits[j]),
                "time_left": int(idx_l[j]),
                "time_right": int(idx_r[j]),
                "z_left_of_low": int(zl_l[idx_l[j]]),
                "z_left_of_high": int(zl_r[idx_r[j]]),
                "z_right_of_low": int(zr_l[idx_l[j]]),
                "z_right_of_high": int(zr_r[idx_r[j]]),
            })
    return record


# ---------------------------------------------------------------------------
# good-event monitor for the perturbed-edge walk
# ---------------------------------------------------------------------------

def monitor_good_event(run: WalkRun, L: int | None = None, M: int = 0) -> dict:
    """Check the localization-friendly event on a perturbed-edge run.

    The event holds when some level ``K <= L`` satisfies, for every time
    ``n >= M``:

    * ``Z_n(1) <= N_n(0,1) + f(N_n(0,1))`` (boundary envelope),
    * ``Z_n(x) <= (1 + eps) * N_n(x-1, x)`` for ``2 <= x <= K``,
    * no site ``>= K`` is visited after time ``M`` (frozen tail).

    Returns ``{"holds", "K", "first_violation_step"}`` where ``K`` is the
    smallest admissible level and, when the event fails,
    ``first_violation_step`` is the time by which the last surviving
    candidate level has failed (the event is definitively dead from that
    step on).
    """
    kind = run.kind
    if kind.variant not in (HAT_WALK, HAT_RESTRICTED):
        raise ValueError("good-event monitor applies to perturbed-edge walks")
    if L is None:
        L = kind.L
    if L is None or L < 1:
        raise ValueError("monitor needs a level bound L >= 1")
    n_tot = run.step_count
    if not 0 <= M <= n_tot:
        raise ValueError(f"M={M} outside the run horizon {n_tot}")
    trace = run.trace_array()
    z0 = run.initial.z
    ne0 = run.initial.n_edge
    inf = n_tot + 1

    def first_at_or_after(mask: np.ndarray, start: int) -> int:
        idx = np.flatnonzero(mask[start:])
        return int(idx[0]) + start if idx.size else inf

    # Z_n(x) series (time-indexed, includes the arrival at time n).
    def z_series(x: int) -> np.ndarray:
        return z0.get(x, 0) + np.cumsum(trace == x)

    # N_n(x, x+1) series (jumps strictly before time n).
    def n_series(x: int) -> np.ndarray:
        jumps = (trace[:-1] == x) & (trace[1:] == x + 1)
        out = np.zeros(n_tot + 1, dtype=np.int64)
        np.cumsum(jumps, out=out[1:])
        return out + ne0.get(x, 0)

    n01 = n_series(0)
    envelope = n01 + np.asarray(kind.f(n01.astype(np.float64)))
    cond1_fail = first_at_or_after(z_series(1) > envelope, M)

    cond2_fail = {}
    for x in range(2, L + 1):
        lhs = z_series(x)
        rhs = (1.0 + kind.epsilon) * n_series(x - 1)
        cond2_fail[x] = first_at_or_after(lhs > rhs, M)

    freeze_fail = {}
    for level in range(1, L + 1):
        freeze_fail[level] = first_at_or_after(trace >= level, M + 1)

    t_by_level = {}
    for level in range(1, L + 1):
        t = min([cond1_fail, freeze_fail[level]]
                + [cond2_fail[x] for x in range(2, level + 1)])
        t_by_level[level] = t
    admissible = [lv for lv, t in t_by_level.items() if t == inf]
    if admissible:
        return {"holds": True, "K": min(admissible), "first_violation_step": None}
    return {"holds": False, "K": None,
            "first_violation_step": max(t_by_level.values())}


# ---------------------------------------------------------------------------
# soft corollary checks and forensic replay
# ---------------------------------------------------------------------------

def check_corollary_consequences(record: CouplingRecord) -> dict:
    """Horizon-limited sanity report on a paired record (soft checks only).

    The sites the right walk still visits during the last quarter of the
    horizon serve as a proxy for its eventually-recurrent range
    ``[proxy_site, right_top]``.  Two finite-horizon surrogates of the
    asymptotic consequences of domination are then reported:

    * ``range_bound`` -- during the last quarter the left walk never sits
      strictly to the right of ``right_top``;
    * ``tail_counts`` -- strictly beyond ``right_top`` (where both walks'
      local times have plausibly stabilised) the left walk's final local
      times never exceed the right walk's.

    Inside the still-growing range no count comparison is meaningful at a
    finite horizon, so a per-site table is included for inspection but
    carries no verdict.  The whole report is advisory.
    """
    if record.right_trace is None or record.left_trace is None:
        raise ValueError("record must carry in-memory traces")
    trace_l = np.asarray(record.left_trace)
    trace_r = np.asarray(record.right_trace)
    n = trace_r.size - 1
    tail_r = trace_r[(3 * n) // 4 + 1:]
    tail_l = trace_l[(3 * n) // 4 + 1:]
    if tail_r.size == 0 or tail_l.size == 0:
        return {"proxy_site": None, "right_top": None, "holds": True,
                "range_bound": None, "tail_counts": None, "site_table": [],
                "note": "horizon too short for a last-quarter proxy"}
    proxy = int(tail_r.min())
    right_top = int(tail_r.max())
    left_top = int(tail_l.max())

    range_bound = {"holds": left_top <= right_top,
                   "left_last_quarter_max": left_top,
                   "right_last_quarter_max": right_top}

    z_left = record.final_left.z
    z_right = record.final_right.z
    beyond = sorted(x for x in set(z_left) | set(z_right) if x > right_top)
    tail_viol = [{"site": x, "z_low": z_left.get(x, 0),
                  "z_high": z_right.get(x, 0)}
                 for x in beyond if z_left.get(x, 0) > z_right.get(x, 0)]
    tail_counts = {"holds": not tail_viol, "n_checked": len(beyond),
                   "violations": tail_viol}

    table = [{"site": x, "z_low": z_left.get(x, 0),
              "z_high": z_right.get(x, 0)}
             for x in sorted(x for x in set(z_left) | set(z_right)
                             if x >= proxy)]
    return {
        "proxy_site": proxy,
        "right_top": right_top,
        "holds": range_bound["holds"] and tail_counts["holds"],
        "range_bound": range_bound,
        "tail_counts": tail_counts,
        "site_table": table,
        "note": ("finite-horizon surrogates: range bound over the last "
                 "quarter plus count comparison strictly beyond the right "
                 "walk's still-growing range; advisory only"),
    }


def replay_step(left_kind: WalkKind, right_kind: WalkKind,
                initial: LedgerState | None, seed: int, step: int) -> dict:
    """Recompute everything both walks saw at one time index.

    Used for forensic inspection of a reported violation: returns, for
    each walk, the position, its visit count, the neighbour local times,
    the shared uniform it consumed and the left-move probability.
    """
    if step < 0:
        raise ValueError("step must be >= 0")
    if initial is None:
        initial = trivial_state()
    out = {"step": int(step), "seed": int(seed)}
    for tag, kind in (("left", left_kind), ("right", right_kind)):
        run = run_walk(kind, initial, seed, step + 1, record=True)
        trace = run.trace_array()
        vis, zl, zr = run.rows
        pos = int(trace[step])
        state = state_at(run, step)
        p_left = prob_left(kind, state, pos)
        out[tag] = {
            "kind": kind.label,
            "position": pos,
            "visit": int(vis[step]),
            "z_left_neighbour": int(zl[step]),
            "z_right_neighbour": int(zr[step]),
            "uniform": field_uniform(seed, pos, int(vis[step])),
            "prob_left": p_left,
            "next_position": int(trace[step + 1]),
        }
    out["shared_uniform"] = (
        out["left"]["position"] == out["right"]["position"]
        and out["left"]["visit"] == out["right"]["visit"])
    return out
