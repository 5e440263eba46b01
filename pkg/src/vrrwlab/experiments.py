"""Diagnostics and batch experiments on simulated walks.

Everything here post-processes recorded position traces: local-time
series, reciprocal-weight jump sums and their martingale differences,
localization detection, local-time profiles against the predicted
envelope family, the exact five-site pathwise identity, urn-style
balance at origin returns, and a campaign driver that fans out over
(weight, kind, seed) combinations.

Time conventions match the walk layer: a length-``n`` run produces the
positions ``X_0 .. X_n`` (``n + 1`` entries), local times at time ``t``
count arrivals at times ``<= t`` plus initial counts, and jump sums at
time ``t`` run over jumps departing at times ``< t``.
"""
from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .weights import WeightSpec, eval_w, parse_weight, weight_int_table
from .walks import (
    BREVE_WALK,
    REFLECTED_VRRW,
    TILDE_WALK,
    VRRW_Z,
    WalkKind,
    WalkRun,
    breve_walk,
    reflected_vrrw,
    run_walk,
    tilde_walk,
    vrrw_z,
)

__all__ = [
    "DiagnosticSeries",
    "LocalizationReport",
    "ProfileReport",
    "UrnReport",
    "CampaignConfig",
    "compute_diagnostics",
    "detect_localization",
    "profile_compare",
    "pathwise_identity_check",
    "urn_balance",
    "campaign",
    "make_checkpoints",
]


# ---------------------------------------------------------------------------
# series helpers (shared by diagnostics and the identity check)
# ---------------------------------------------------------------------------

def make_checkpoints(n: int, per_decade: int = 8) -> np.ndarray:
    """Geometric time grid 0 .. n with ``per_decade`` points per decade."""
    if per_decade < 1:
        raise ValueError("per_decade must be >= 1")
    if n <= 0:
        return np.zeros(1, dtype=np.int64)
    top = int(np.floor(per_decade * np.log10(n)))
    vals = np.round(10.0 ** (np.arange(top + 1) / per_decade)).astype(np.int64)
    vals = vals[(vals >= 1) & (vals <= n)]
    return np.unique(np.concatenate([[0], vals, [n]]))


def _z_series(trace: np.ndarray, z0: dict, x: int) -> np.ndarray:
    """Local time of site ``x`` at every time index (int64, length n+1)."""
    return z0.get(x, 0) + np.cumsum(trace == x, dtype=np.int64)


def _edge_series(trace: np.ndarray, ne0: dict, x: int) -> np.ndarray:
    """Count of jumps ``x -> x+1`` before each time index (length n+1)."""
    out = np.zeros(trace.size, dtype=np.int64)
    if trace.size > 1:
        jumps = (trace[:-1] == x) & (trace[1:] == x + 1)
        np.cumsum(jumps, out=out[1:])
    return out + ne0.get(x, 0)


def _y_series(trace: np.ndarray, z0: dict, spec: WeightSpec, x: int,
              sign: int) -> np.ndarray:
    """Reciprocal-weight jump sum out of ``x`` towards ``x + sign``.

    Entry ``t`` sums ``1 / w(Z_k(x + sign))`` over jump times ``k < t``;
    the neighbour local time is taken at the departure time ``k``.
    """
    out = np.zeros(trace.size, dtype=np.float64)
    if trace.size <= 1:
        return out
    ks = np.flatnonzero((trace[:-1] == x) & (trace[1:] == x + sign))
    if ks.size:
        neigh = _z_series(trace, z0, x + sign)
        incr = 1.0 / eval_w(spec, neigh[ks].astype(np.float64))
        np.add.at(out, ks + 1, incr)
    return np.cumsum(out)


# ---------------------------------------------------------------------------
# diagnostics series
# ---------------------------------------------------------------------------

@dataclass
class DiagnosticSeries:
    """Checkpointed observables of one run.

    All arrays are aligned with ``checkpoints``.  ``urn_times`` /
    ``urn_ratio`` (present when site 0 is probed) are instead aligned
    with the successive visits to the origin.  The five-site interval
    statistics ``i_n`` (smaller end local time), ``s_n`` (larger end)
    and ``k_n`` (larger odd-site local time) are only populated for
    doubly-reflected runs on the five sites 0..4.
    """

    checkpoints: np.ndarray
    probes: tuple
    local_times: dict
    range_lo: np.ndarray
    range_hi: np.ndarray
    y_plus: dict
    y_minus: dict
    martingale: dict
    urn_times: np.ndarray | None = None
    urn_ratio: np.ndarray | None = None
    i_n: np.ndarray | None = None
    s_n: np.ndarray | None = None
    k_n: np.ndarray | None = None

    def to_csv(self, path) -> None:
        header = ["step", "range_lo", "range_hi"]
        for x in self.probes:
            header += [f"z[{x}]", f"y_plus[{x}]", f"y_minus[{x}]", f"m[{x}]"]
        extra = [name for name, arr in (("i_n", self.i_n), ("s_n", self.s_n),
                                        ("k_n", self.k_n)) if arr is not None]
        header += extra
        with open(path, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh)
            wr.writerow(header)
            for j, t in enumerate(self.checkpoints):
                row = [int(t), int(self.range_lo[j]), int(self.range_hi[j])]
                for x in self.probes:
                    row += [int(self.local_times[x][j]),
                            repr(float(self.y_plus[x][j])),
                            repr(float(self.y_minus[x][j])),
                            repr(float(self.martingale[x][j]))]
                for name in extra:
                    row.append(int(getattr(self, name)[j]))
                wr.writerow(row)


def _is_five_site(kind: WalkKind) -> bool:
    return (kind.variant == REFLECTED_VRRW and kind.floor == 0
            and kind.ceiling == 4)


def compute_diagnostics(run: WalkRun, probes=(),
                        checkpoints_per_decade: int = 8) -> DiagnosticSeries:
    """Post-process a finished run into a checkpointed series.

    ``probes`` lists the sites whose local times and jump sums are
    tracked; when empty, the sites of the final visited range clipped to
    -5..5 are used.  Site 0 in the probe set additionally triggers the
    origin-return ratio series ``Z(1)/Z(-1)``.
    """
    trace = run.trace_array()
    n = run.step_count
    cps = make_checkpoints(n, checkpoints_per_decade)
    z0 = run.initial.z
    spec = run.kind.weight

    lo_run = np.minimum.accumulate(trace)
    hi_run = np.maximum.accumulate(trace)
    if not probes:
        probes = tuple(range(max(int(lo_run[-1]), -5),
                             min(int(hi_run[-1]), 5) + 1))
    probes = tuple(int(x) for x in probes)

    local_times, y_plus, y_minus, mart = {}, {}, {}, {}
    for x in probes:
        local_times[x] = _z_series(trace, z0, x)[cps]
        yp = _y_series(trace, z0, spec, x, +1)
        ym = _y_series(trace, z0, spec, x, -1)
        y_plus[x] = yp[cps]
        y_minus[x] = ym[cps]
        mart[x] = y_plus[x] - y_minus[x]

    series = DiagnosticSeries(
        checkpoints=cps, probes=probes, local_times=local_times,
        range_lo=lo_run[cps], range_hi=hi_run[cps],
        y_plus=y_plus, y_minus=y_minus, martingale=mart)

    if 0 in probes:
        times0 = np.flatnonzero(trace == 0)
        zp = _z_series(trace, z0, 1)[times0].astype(np.float64)
        zm = _z_series(trace, z0, -1)[times0].astype(np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = zp / zm
        series.urn_times = times0
        series.urn_ratio = ratio

    if _is_five_site(run.kind):
        z_at = {x: _z_series(trace, z0, x)[cps] for x in (0, 1, 3, 4)}
        series.i_n = np.minimum(z_at[0], z_at[4])
        series.s_n = np.maximum(z_at[0], z_at[4])
        series.k_n = np.maximum(z_at[1], z_at[3])
    return series


# ---------------------------------------------------------------------------
# localization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalizationReport:
    localized: bool
    range_lo: int
    range_hi: int
    stabilization_step: int

    @property
    def size(self) -> int:
        return self.range_hi - self.range_lo + 1


def detect_localization(run: WalkRun, min_steps: int = 10_000) -> LocalizationReport:
    """Windowed localization check on a finished run.

    The run is declared localized when the visited range (as an
    interval) over the last half of the steps coincides with the range
    over the last tenth; that window range is reported together with the
    earliest step after which the cumulative visited range never grew.
    """
    n = run.step_count
    if n < min_steps:
        raise ValueError(
            f"localization detection needs at least {min_steps} steps, got {n}")
    trace = run.trace_array()
    w50 = trace[-(n // 2):]
    w10 = trace[-max(1, n // 10):]
    lo50, hi50 = int(w50.min()), int(w50.max())
    lo10, hi10 = int(w10.min()), int(w10.max())
    rl = np.minimum.accumulate(trace)
    rh = np.maximum.accumulate(trace)
    stab = int(np.argmax((rl == rl[-1]) & (rh == rh[-1])))
    return LocalizationReport(localized=(lo50 == lo10 and hi50 == hi10),
                              range_lo=lo50, range_hi=hi50,
                              stabilization_step=stab)


# ---------------------------------------------------------------------------
# local-time profile against the predicted envelopes
# ---------------------------------------------------------------------------

@dataclass
class ProfileReport:
    """Recentred local-time profile compared with predicted envelopes.

    ``rows`` hold, for each distance ``i`` from the recentred peak and
    each side, the final local time, the envelope value at the horizon,
    their ratio, and the slope of ``log Z`` against ``log envelope``
    over the last two decades of checkpoints.
    """

    center: int
    n_steps: int
    rows: list
    checkpoints: np.ndarray
    series: dict

    def to_gnuplot(self, path) -> None:
        """Columns: step, then Z at center offsets, then envelopes."""
        offs = sorted({r["offset"] * r["side"] for r in self.rows} | {0})
        env_is = sorted({r["offset"] for r in self.rows})
        with open(path, "w", encoding="utf-8") as fh:
            cols = ["step"] + [f"z_off_{o}" for o in offs]
            cols += [f"envelope_{i}" for i in env_is]
            fh.write("# " + " ".join(cols) + "\n")
            for j, t in enumerate(self.checkpoints):
                vals = [str(int(t))]
                vals += [str(int(self.series[o][j])) for o in offs]
                vals += [repr(float(self.series[f"env{i}"][j]))
                         for i in env_is]
                fh.write(" ".join(vals) + "\n")


def profile_compare(run: WalkRun, psi, checkpoints_per_decade: int = 8) -> ProfileReport:
    """Compare a run's local-time profile with the envelope family.

    ``psi`` is the list of envelope callables for distances 1, 2, ...
    from the peak (time -> predicted local time).  The most visited site
    is recentred to 0, so the report is invariant under shifting the
    whole run.
    """
    trace = run.trace_array()
    n = run.step_count
    if n < 1:
        raise ValueError("profile comparison needs at least one step")
    cps = make_checkpoints(n, checkpoints_per_decade)
    z0 = run.initial.z
    center = max(run.ledger.z.items(), key=lambda kv: (kv[1], -kv[0]))[0]

    series = {0: _z_series(trace, z0, center)[cps]}
    rows = []
    late = cps >= max(1, n // 100)   # last two decades of the grid
    for i, env in enumerate(psi, start=1):
        env_vals = np.asarray(env(cps.astype(np.float64)), dtype=np.float64)
        series[f"env{i}"] = env_vals
        for side in (+1, -1):
            z_vals = _z_series(trace, z0, center + side * i)[cps]
            series[side * i] = z_vals
            env_n = float(env(float(n)))
            ratio = float(z_vals[-1]) / env_n if env_n > 0 else float("inf")
            ok = late & (z_vals > 0) & (env_vals > 0)
            if ok.sum() >= 2:
                slope = float(np.polyfit(np.log(env_vals[ok]),
                                         np.log(z_vals[ok]), 1)[0])
            else:
                slope = float("nan")
            rows.append({"offset": i, "side": side,
                         "z_final": int(z_vals[-1]),
                         "envelope_final": env_n,
                         "ratio": ratio, "slope": slope})
    return ProfileReport(center=int(center), n_steps=n, rows=rows,
                         checkpoints=cps, series=series)


# ---------------------------------------------------------------------------
# exact pathwise identity on the doubly-reflected five-site walk
# ---------------------------------------------------------------------------

def pathwise_identity_check(run: WalkRun) -> float:
    """Maximum drift of the five-site reciprocal-weight identity.

    For the walk reflected at 0 and 4 and every ``x`` in 0..2, the
    quantity ``W(Z_n(x+2)) - W(Z_n(x))
    - (Y-_n(x+3) - Y+_n(x-1) + M_n(x+1))`` must stay constant in ``n``
    (``W`` is the cumulative reciprocal-weight sum, ``Y±`` the
    reciprocal-weight jump sums and ``M = Y+ - Y-``).  Returns the
    largest absolute deviation from the time-0 value across ``x`` and
    ``n``; exactness of the identity means this is pure float noise.
    """
    if not _is_five_site(run.kind):
        raise ValueError("identity check needs the doubly-reflected walk on 0..4")
    trace = run.trace_array()
    z0 = run.initial.z
    spec = run.kind.weight
    z_max = int(max((_z_series(trace, z0, x)[-1] for x in range(5)),
                    default=0))
    w_tab = weight_int_table(spec, z_max)
    w_cum = np.concatenate([[0.0], np.cumsum(1.0 / w_tab)])

    def w_disc(values: np.ndarray) -> np.ndarray:
        return w_cum[values]

    worst = 0.0
    for x in (0, 1, 2):
        lhs = (w_disc(_z_series(trace, z0, x + 2))
               - w_disc(_z_series(trace, z0, x)))
        rhs = (_y_series(trace, z0, spec, x + 3, -1)
               - _y_series(trace, z0, spec, x - 1, +1)
               + _y_series(trace, z0, spec, x + 1, +1)
               - _y_series(trace, z0, spec, x + 1, -1))
        resid = lhs - rhs
        worst = max(worst, float(np.max(np.abs(resid - resid[0]))))
    return worst


# ---------------------------------------------------------------------------
# urn-style balance at origin returns
# ---------------------------------------------------------------------------

@dataclass
class UrnReport:
    times: np.ndarray
    ratios: np.ndarray

    @property
    def final_ratio(self) -> float:
        return float(self.ratios[-1])


def urn_balance(run: WalkRun) -> UrnReport:
    """Ratio ``Z(1)/Z(-1)`` sampled at every visit to the origin.

    Requires at least 100 origin visits over the horizon; ratios where
    ``Z(-1) = 0`` are reported as ``inf``.
    """
    trace = run.trace_array()
    times0 = np.flatnonzero(trace == 0)
    if times0.size < 100:
        raise ValueError(
            f"urn balance needs >= 100 visits to the origin, got {times0.size}")
    z0 = run.initial.z
    zp = _z_series(trace, z0, 1)[times0].astype(np.float64)
    zm = _z_series(trace, z0, -1)[times0].astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = zp / zm
    return UrnReport(times=times0, ratios=ratios)


# ---------------------------------------------------------------------------
# campaign driver
# ---------------------------------------------------------------------------

_CAMPAIGN_KINDS = (VRRW_Z, REFLECTED_VRRW, TILDE_WALK, BREVE_WALK)


@dataclass
class CampaignConfig:
    """Declarative description of a simulation campaign.

    ``kinds`` and ``pairs`` use walk variant names; perturbed-edge walks
    are excluded here because they need a fitted envelope function.
    ``pairs`` are (low, high) coupling comparisons run over the same
    seeds at ``pair_steps``.  ``identity_checks`` adds the five-site
    identity drift per weight.  ``threads`` defaults to the
    VRRW_LAB_THREADS environment variable, then to the CPU count.
    """

    weights: list
    kinds: list
    seeds: list
    n_steps: int
    gamma: float = 0.3
    pairs: list = field(default_factory=list)
    pair_steps: int = 10_000
    identity_checks: bool = False
    identity_steps: int = 100_000
    probes: tuple = ()
    threads: int | None = None

    def validate(self) -> list:
        errors = []
        if not self.weights:
            errors.append("weights: at least one weight configuration is required")
        for wstr in self.weights:
            try:
                parse_weight(wstr)
            except Exception as exc:
                errors.append(f"weights: {wstr!r} is invalid ({exc})")
        if not self.kinds:
            errors.append("kinds: at least one walk kind is required")
        for kind in self.kinds:
            if kind not in _CAMPAIGN_KINDS:
                errors.append(
                    f"kinds: {kind!r} is not one of {', '.join(_CAMPAIGN_KINDS)}")
        if not self.seeds:
            errors.append("seeds: at least one seed is required")
        for s in self.seeds:
            if not isinstance(s, (int, np.integer)) or s < 0 or s >= 1 << 64:
                errors.append(f"seeds: {s!r} is not an unsigned 64-bit integer")
                break
        if self.n_steps < 1:
            errors.append(f"n_steps: must be >= 1, got {self.n_steps}")
        if not 0.0 < self.gamma < 0.5:
            errors.append(f"gamma: must lie in (0, 1/2), got {self.gamma}")
        for pair in self.pairs:
            if (len(pair) != 2 or pair[0] not in _CAMPAIGN_KINDS
                    or pair[1] not in _CAMPAIGN_KINDS):
                errors.append(f"pairs: {pair!r} is not a pair of known kinds")
        if self.pair_steps < 1:
            errors.append(f"pair_steps: must be >= 1, got {self.pair_steps}")
        if self.identity_steps < 1:
            errors.append(f"identity_steps: must be >= 1, got {self.identity_steps}")
        if self.threads is not None and self.threads < 1:
            errors.append(f"threads: must be >= 1, got {self.threads}")
        return errors


def _make_kind(name: str, spec: WeightSpec, gamma: float) -> WalkKind:
    if name == VRRW_Z:
        return vrrw_z(spec)
    if name == REFLECTED_VRRW:
        return reflected_vrrw(spec)
    if name == TILDE_WALK:
        return tilde_walk(spec)
    if name == BREVE_WALK:
        return breve_walk(spec, gamma)
    raise ValueError(f"unknown campaign walk kind {name!r}")


def resolve_threads(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("VRRW_LAB_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


def _slug(text: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in text)


def _summarise_run(kind: WalkKind, seed: int, n_steps: int) -> dict:
    run = run_walk(kind, None, seed, n_steps)
    row = {"seed": int(seed)}
    if n_steps >= 10_000:
        rep = detect_localization(run)
        row.update(localized=bool(rep.localized), range_lo=rep.range_lo,
                   range_hi=rep.range_hi, range_size=rep.size,
                   stabilization_step=rep.stabilization_step)
    else:
        trace = run.trace_array()
        lo, hi = int(trace.min()), int(trace.max())
        row.update(localized=None, range_lo=lo, range_hi=hi,
                   range_size=hi - lo + 1, stabilization_step=None)
    center = max(run.ledger.z.items(), key=lambda kv: (kv[1], -kv[0]))[0]
    share = sum(run.ledger.z.get(center + d, 0)
                - run.initial.z.get(center + d, 0) for d in (-1, 0, 1))
    row["center_share"] = share / (n_steps + 1)
    return row


def campaign(config: CampaignConfig, output_dir=None) -> dict:
    """Run a full (weight x kind x seed) campaign and aggregate a report.

    Validation failures are all reported at once.  With fixed seeds the
    report is byte-identical across reruns; when ``output_dir`` is given
    the report JSON, per-combination run CSVs and plot-ready profile
    data files are written there.
    """
    errors = config.validate()
    if errors:
        raise ValueError("invalid campaign configuration:\n  "
                         + "\n  ".join(errors))
    n_threads = resolve_threads(config.threads)
    report: dict = {"config": asdict(config), "results": {},
                    "expected_range_band": {}}
    files: dict = {}

    for wstr in config.weights:
        spec = parse_weight(wstr)
        report["results"][wstr] = {}
        report["expected_range_band"][wstr] = _expected_band(spec)
        for kname in config.kinds:
            kind = _make_kind(kname, spec, config.gamma)
            with ThreadPoolExecutor(max_workers=n_threads) as pool:
                rows = list(pool.map(
                    lambda s: _summarise_run(kind, s, config.n_steps),
                    config.seeds))
            n_loc = sum(1 for r in rows if r["localized"])
            hist: dict = {}
            for r in rows:
                if r["localized"]:
                    hist[r["range_size"]] = hist.get(r["range_size"], 0) + 1
            agg = {
                "n_runs": len(rows),
                "localized_fraction": n_loc / len(rows),
                "range_size_histogram": {str(k): hist[k]
                                         for k in sorted(hist)},
                "center_share_median": float(np.median(
                    [r["center_share"] for r in rows])),
                "runs": rows,
            }
            report["results"][wstr][kname] = agg
            files[(wstr, kname)] = rows

    if config.pairs:
        from .coupling import paired_simulate
        report["pairs"] = {}
        for wstr in config.weights:
            spec = parse_weight(wstr)
            for low, high in config.pairs:
                key = f"{wstr}:{low}<{high}"
                kl = _make_kind(low, spec, config.gamma)
                kh = _make_kind(high, spec, config.gamma)
                with ThreadPoolExecutor(max_workers=n_threads) as pool:
                    recs = list(pool.map(
                        lambda s: paired_simulate(kl, kh, None, s,
                                                  config.pair_steps),
                        config.seeds))
                report["pairs"][key] = {
                    "n_runs": len(recs),
                    "n_matched": int(sum(r.n_matched for r in recs)),
                    "n_violations": int(sum(r.n_violations for r in recs)),
                }

    if config.identity_checks:
        report["identity"] = {}
        for wstr in config.weights:
            spec = parse_weight(wstr)
            kind = reflected_vrrw(spec, floor=0, ceiling=4)
            with ThreadPoolExecutor(max_workers=n_threads) as pool:
                drifts = list(pool.map(
                    lambda s: pathwise_identity_check(
                        run_walk(kind, None, s, config.identity_steps)),
                    config.seeds))
            report["identity"][wstr] = {
                "n_runs": len(drifts),
                "max_drift": float(max(drifts)),
            }

    if output_dir is not None:
        _write_campaign_files(report, files, config, output_dir)
    return report


def _expected_band(spec: WeightSpec) -> dict:
    """Predicted localization-size window (reported, never asserted)."""
    try:
        from .operators import index_limits
        lims = index_limits(spec)
        i_minus, i_plus = lims.i_minus, lims.i_plus
    except Exception:
        return {"available": False}
    return {
        "available": i_minus is not None or i_plus is not None,
        "min_size": 2 * i_minus + 1 if i_minus is not None else None,
        "max_size": 2 * i_plus + 1 if i_plus is not None else None,
    }


def _atomic_json(payload: dict, path: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def _write_campaign_files(report: dict, files: dict, config: CampaignConfig,
                          output_dir) -> None:
    os.makedirs(output_dir, exist_ok=True)
    _atomic_json(report, os.path.join(output_dir, "report.json"))
    for (wstr, kname), rows in files.items():
        path = os.path.join(output_dir, f"runs_{_slug(wstr)}_{_slug(kname)}.csv")
        cols = ["seed", "localized", "range_lo", "range_hi", "range_size",
                "stabilization_step", "center_share"]
        with open(path + ".tmp", "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh)
            wr.writerow(cols)
            for r in rows:
                wr.writerow([r["seed"], r["localized"], r["range_lo"],
                             r["range_hi"], r["range_size"],
                             r["stabilization_step"],
                             repr(float(r["center_share"]))])
        os.replace(path + ".tmp", path)
        spec = parse_weight(wstr)
        _write_profile_data(spec, config, wstr, kname, output_dir)


def _write_profile_data(spec: WeightSpec, config: CampaignConfig, wstr: str,
                        kname: str, output_dir) -> None:
    """Best-effort plot-ready local-time profile for the first seed."""
    try:
        from .operators import index_limits, psi_profile
        lims = index_limits(spec)
        if lims.i_plus is None or not np.isfinite(lims.i_plus):
            i_max = 2
        else:
            i_max = min(int(lims.i_plus), 3)
        psi = psi_profile(spec, i_max)
        kind = _make_kind(kname, spec, config.gamma)
        run = run_walk(kind, None, config.seeds[0], config.n_steps)
        prof = profile_compare(run, psi)
        path = os.path.join(
            output_dir, f"profile_{_slug(wstr)}_{_slug(kname)}.dat")
        prof.to_gnuplot(path)
    except Exception:
        pass
