"""Command-line interface: deterministic, scriptable access to the lab.

Subcommands: ``index`` (localization indices of a weight), ``simulate``
(single run with checkpointed diagnostics), ``couple`` (pathwise
comparison over a seed list), ``profile`` (recentred local-time profile
against predicted envelopes), ``verify`` (self-checks on a weight), and
``campaign`` (multi-seed, multi-kind batch with aggregated report).

Conventions shared by all subcommands:

* every numeric flag is validated before any work starts; validation
  problems are all reported at once and exit with status 2, runtime
  failures exit with status 1;
* ``--config FILE`` supplies values for unset flags from a JSON object
  keyed by flag names (explicit flags win, with a warning on stderr);
* file outputs are written atomically (temp file + rename) and are
  byte-identical across reruns with identical inputs;
* seed lists expand client-side (``7``, ``1..1000``, or ``3,5,8``); no
  global random-generator state exists anywhere.
"""
from __future__ import annotations

import json
import os
import sys

import click
from click.core import ParameterSource

from . import walks
from .walks import LedgerState
from .weights import parse_weight

_KIND_ALIASES = {
    "vrrw": walks.VRRW_Z,
    "vrrw_z": walks.VRRW_Z,
    "reflected": walks.REFLECTED_VRRW,
    "reflected_vrrw": walks.REFLECTED_VRRW,
    "tilde": walks.TILDE_WALK,
    "tilde_walk": walks.TILDE_WALK,
    "breve": walks.BREVE_WALK,
    "breve_walk": walks.BREVE_WALK,
}


class ValidationFailure(Exception):
    """Aggregated flag-validation problems (CLI exit status 2)."""

    def __init__(self, errors):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


# ---------------------------------------------------------------------------
# config merge + validation helpers
# ---------------------------------------------------------------------------

def _merged_params(ctx: click.Context) -> dict:
    """Apply the JSON config file: unset flags take config values.

    An explicit command-line flag always wins; when it shadows a config
    entry a warning is emitted on stderr.
    """
    params = dict(ctx.params)
    config_path = params.pop("config", None)
    if not config_path:
        return params
    try:
        with open(config_path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationFailure([f"--config: cannot read {config_path}: {exc}"])
    if not isinstance(cfg, dict):
        raise ValidationFailure([f"--config: {config_path} must hold a JSON object"])
    unknown = sorted(set(cfg) - set(params))
    if unknown:
        raise ValidationFailure(
            [f"--config: unknown key {k!r} for this subcommand" for k in unknown])
    for name, value in cfg.items():
        source = ctx.get_parameter_source(name)
        if source == ParameterSource.COMMANDLINE:
            flag = "--" + name.replace("_", "-")
            click.echo(f"warning: {flag} given on the command line overrides "
                       f"the config value {value!r}", err=True)
        else:
            params[name] = value
    return params


class _Validator:
    """Collects every flag problem so they can be reported all at once."""

    def __init__(self):
        self.errors = []

    def fail(self, msg: str) -> None:
        self.errors.append(msg)

    def finish(self) -> None:
        if self.errors:
            raise ValidationFailure(self.errors)

    def int_flag(self, name, value, minimum=None, maximum=None):
        try:
            out = int(str(value), 0)
        except (TypeError, ValueError):
            self.fail(f"--{name}: expected an integer, got {value!r}")
            return None
        if minimum is not None and out < minimum:
            self.fail(f"--{name}: must be >= {minimum}, got {out}")
            return None
        if maximum is not None and out > maximum:
            self.fail(f"--{name}: must be <= {maximum}, got {out}")
            return None
        return out

    def float_flag(self, name, value, minimum=None, maximum=None,
                   strict_min=None, strict_max=None):
        try:
            out = float(value)
        except (TypeError, ValueError):
            self.fail(f"--{name}: expected a number, got {value!r}")
            return None
        if minimum is not None and out < minimum:
            self.fail(f"--{name}: must be >= {minimum}, got {out}")
            return None
        if maximum is not None and out > maximum:
            self.fail(f"--{name}: must be <= {maximum}, got {out}")
            return None
        if strict_min is not None and out <= strict_min:
            self.fail(f"--{name}: must be > {strict_min}, got {out}")
            return None
        if strict_max is not None and out >= strict_max:
            self.fail(f"--{name}: must be < {strict_max}, got {out}")
            return None
        return out

    def weight_flag(self, name, value):
        if value is None:
            self.fail(f"--{name}: a weight configuration string is required")
            return None
        try:
            return parse_weight(str(value))
        except Exception as exc:
            self.fail(f"--{name}: {exc}")
            return None

    def kind_flag(self, name, value):
        key = str(value).strip().lower()
        if key not in _KIND_ALIASES:
            self.fail(f"--{name}: unknown walk kind {value!r} "
                      f"(choose from {', '.join(sorted(set(_KIND_ALIASES)))})")
            return None
        return _KIND_ALIASES[key]

    def seeds_flag(self, name, value):
        seeds = []
        try:
            for part in str(value).split(","):
                part = part.strip()
                if not part:
                    continue
                if ".." in part:
                    lo_s, hi_s = part.split("..", 1)
                    lo, hi = int(lo_s), int(hi_s)
                    if hi < lo:
                        raise ValueError(f"empty range {part}")
                    if hi - lo >= 1_000_000:
                        raise ValueError(f"range {part} is unreasonably large")
                    seeds.extend(range(lo, hi + 1))
                else:
                    seeds.append(int(part, 0))
        except ValueError as exc:
            self.fail(f"--{name}: {exc} (use N, A..B, or comma lists)")
            return None
        if not seeds:
            self.fail(f"--{name}: at least one seed is required")
            return None
        bad = [s for s in seeds if s < 0 or s >= 1 << 64]
        if bad:
            self.fail(f"--{name}: seeds must be unsigned 64-bit, got {bad[:3]}")
            return None
        return seeds

    def eta_sweep_flag(self, name, value):
        try:
            lo_s, hi_s, n_s = str(value).split(":")
            lo, hi, n = float(lo_s), float(hi_s), int(n_s)
        except ValueError:
            self.fail(f"--{name}: expected LO:HI:N, got {value!r}")
            return None
        if not (0.0 < lo <= hi < 1.0):
            self.fail(f"--{name}: need 0 < LO <= HI < 1, got {lo}:{hi}")
            return None
        if n < 1:
            self.fail(f"--{name}: need N >= 1 points, got {n}")
            return None
        if n == 1 and lo != hi:
            self.fail(f"--{name}: N=1 needs LO == HI")
            return None
        return [lo + (hi - lo) * k / max(n - 1, 1) for k in range(n)]

    def initial_flag(self, name, value):
        if value in (None, ""):
            return None
        try:
            return LedgerState.load(str(value))
        except Exception as exc:
            self.fail(f"--{name}: cannot load initial state: {exc}")
            return None

    def probes_flag(self, name, value):
        if value in (None, ""):
            return ()
        try:
            return tuple(int(p) for p in str(value).split(",") if p.strip())
        except ValueError:
            self.fail(f"--{name}: expected comma-separated integers, got {value!r}")
            return ()


def _make_kind(validator, variant, spec, gamma, floor, ceiling):
    """Build the WalkKind for CLI-accessible variants."""
    if spec is None or variant is None:
        return None
    try:
        if variant == walks.VRRW_Z:
            return walks.vrrw_z(spec)
        if variant == walks.REFLECTED_VRRW:
            return walks.reflected_vrrw(spec, floor=floor, ceiling=ceiling)
        if variant == walks.TILDE_WALK:
            return walks.tilde_walk(spec)
        if variant == walks.BREVE_WALK:
            return walks.breve_walk(spec, gamma)
    except Exception as exc:
        validator.fail(f"walk construction failed: {exc}")
        return None
    validator.fail(f"kind {variant} is not available from the CLI")
    return None


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _json_text(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"

def _atomic_write(text: str, path: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)

def _emit(text: str, output: str) -> None:
    if output == "-":
        click.echo(text, nl=False)
    else:
        _atomic_write(text, output)


# ---------------------------------------------------------------------------
# command group
# ---------------------------------------------------------------------------

@click.group(name="vrrwlab")
def cli() -> None:
    """Numerical laboratory for reinforced random walks on the integers."""


_CONFIG_OPT = click.option(
    "--config", default=None, metavar="FILE",
    help="JSON file supplying values for unset flags (flags win; default: none).")


@cli.command("index")
@click.option("--weight", default=None, metavar="FAMILY:PARAMS",
              help="Weight configuration, e.g. linear:1 or polylog:0.6 "
                   "(required; dimensionless).")
@click.option("--eta-sweep", default="0.45:0.55:11", metavar="LO:HI:N",
              show_default=True,
              help="Tilt-parameter sweep as LO:HI:N (dimensionless, in (0,1)).")
@click.option("--hull", default="1e12", metavar="X", show_default=True,
              help="Upper end of the evaluation hull in count units.")
@click.option("--output", default="-", metavar="PATH", show_default=True,
              help="Output JSON path, or - for stdout.")
@_CONFIG_OPT
@click.pass_context
def cmd_index(ctx, **_kw) -> None:
    """Classify a weight: localization indices over a tilt sweep."""
    p = _merged_params(ctx)
    v = _Validator()
    spec = v.weight_flag("weight", p["weight"])
    etas = v.eta_sweep_flag("eta-sweep", p["eta_sweep"])
    hull = v.float_flag("hull", p["hull"], strict_min=1.0)
    v.finish()

    from .operators import index_sweep
    report = index_sweep(spec, etas, m_top=hull)
    _emit(_json_text(report.to_json_dict()), p["output"])


@cli.command("simulate")
@click.option("--weight", default=None, metavar="FAMILY:PARAMS",
              help="Weight configuration, e.g. linear:1 (required).")
@click.option("--kind", default="vrrw", show_default=True, metavar="KIND",
              help="Walk kind: vrrw, reflected, tilde, or breve.")
@click.option("--steps", default="10000", show_default=True, metavar="N",
              help="Number of steps (>= 0).")
@click.option("--seed", default="0", show_default=True, metavar="S",
              help="Seed of the uniform field (unsigned 64-bit).")
@click.option("--gamma", default="0.3", show_default=True, metavar="G",
              help="Origin exit probability for breve (in (0, 1/2)).")
@click.option("--floor", default="-1", show_default=True, metavar="X",
              help="Reflection floor site for reflected kind.")
@click.option("--ceiling", default="", metavar="X",
              help="Optional reflection ceiling site for reflected kind "
                   "(default: none).")
@click.option("--initial", default="", metavar="FILE",
              help="JSON initial state (default: trivial state).")
@click.option("--probes", default="", metavar="X,Y,...",
              help="Probe sites for the diagnostics series "
                   "(default: final range clipped to -5..5).")
@click.option("--checkpoints-per-decade", default="8", show_default=True,
              metavar="K", help="Geometric checkpoint density (per decade).")
@click.option("--out-prefix", default="simulate", show_default=True,
              metavar="PREFIX",
              help="Writes PREFIX_series.csv and PREFIX_final.json.")
@_CONFIG_OPT
@click.pass_context
def cmd_simulate(ctx, **_kw) -> None:
    """Run one walk and write checkpointed diagnostics + final ledger."""
    p = _merged_params(ctx)
    v = _Validator()
    spec = v.weight_flag("weight", p["weight"])
    variant = v.kind_flag("kind", p["kind"])
    steps = v.int_flag("steps", p["steps"], minimum=0)
    seed = v.int_flag("seed", p["seed"], minimum=0, maximum=(1 << 64) - 1)
    gamma = v.float_flag("gamma", p["gamma"], strict_min=0.0, strict_max=0.5)
    floor = v.int_flag("floor", p["floor"])
    ceiling = (v.int_flag("ceiling", p["ceiling"])
               if str(p["ceiling"]).strip() != "" else None)
    initial = v.initial_flag("initial", p["initial"])
    probes = v.probes_flag("probes", p["probes"])
    cpd = v.int_flag("checkpoints-per-decade", p["checkpoints_per_decade"],
                     minimum=1)
    kind = _make_kind(v, variant, spec, gamma, floor, ceiling)
    v.finish()

    from .experiments import compute_diagnostics
    run = walks.run_walk(kind, initial, seed, steps)
    series = compute_diagnostics(run, probes=probes,
                                 checkpoints_per_decade=cpd)
    prefix = p["out_prefix"]
    series_path = f"{prefix}_series.csv"
    series.to_csv(series_path + ".tmp")
    os.replace(series_path + ".tmp", series_path)
    final = {
        "kind": kind.label,
        "weight": spec.label,
        "seed": seed,
        "n_steps": steps,
        "final_position": run.position,
        "range": list(run.range_seen()),
        "ledger": run.ledger.to_json_dict(),
    }
    _atomic_write(_json_text(final), f"{prefix}_final.json")
    click.echo(f"{series_path}\n{prefix}_final.json")


@cli.command("couple")
@click.option("--left", default=None, metavar="KIND",
              help="Walk expected to stay weakly left (required).")
@click.option("--right", default=None, metavar="KIND",
              help="Walk expected to stay weakly right (required).")
@click.option("--weight", default=None, metavar="FAMILY:PARAMS",
              help="Weight configuration shared by both walks (required).")
@click.option("--seeds", default="0..99", show_default=True, metavar="LIST",
              help="Seed list: N, A..B, or comma-separated mix.")
@click.option("--steps", default="10000", show_default=True, metavar="N",
              help="Steps per run (>= 1).")
@click.option("--gamma", default="0.3", show_default=True, metavar="G",
              help="Origin exit probability for breve walks (in (0, 1/2)).")
@click.option("--initial", default="", metavar="FILE",
              help="JSON initial state shared by both walks "
                   "(default: trivial state).")
@click.option("--output", default="-", metavar="PATH", show_default=True,
              help="Summary JSON path, or - for stdout.")
@_CONFIG_OPT
@click.pass_context
def cmd_couple(ctx, **_kw) -> None:
    """Compare two walks pathwise over a seed list; report violations."""
    p = _merged_params(ctx)
    v = _Validator()
    spec = v.weight_flag("weight", p["weight"])
    lvar = v.kind_flag("left", p["left"]) if p["left"] else v.fail(
        "--left: a walk kind is required")
    rvar = v.kind_flag("right", p["right"]) if p["right"] else v.fail(
        "--right: a walk kind is required")
    seeds = v.seeds_flag("seeds", p["seeds"])
    steps = v.int_flag("steps", p["steps"], minimum=1)
    gamma = v.float_flag("gamma", p["gamma"], strict_min=0.0, strict_max=0.5)
    initial = v.initial_flag("initial", p["initial"])
    left = _make_kind(v, lvar, spec, gamma, None, None) if lvar else None
    right = _make_kind(v, rvar, spec, gamma, None, None) if rvar else None
    v.finish()

    from .coupling import paired_simulate
    total_matched = total_checked = total_incomp = total_viol = 0
    violating = []
    samples = []
    for seed in seeds:
        rec = paired_simulate(left, right, initial, seed, steps)
        total_matched += rec.n_matched
        total_checked += rec.n_jump_checked
        total_incomp += rec.n_incomparable
        total_viol += rec.n_violations
        if rec.n_violations:
            violating.append(seed)
            if len(samples) < 20:
                samples.extend(rec.violations[:20 - len(samples)])
    summary = {
        "left": left.label,
        "right": right.label,
        "weight": spec.label,
        "n_steps": steps,
        "n_runs": len(seeds),
        "total_matched": total_matched,
        "total_jump_checked": total_checked,
        "total_incomparable": total_incomp,
        "total_violations": total_viol,
        "ordered_everywhere": total_viol == 0,
        "violating_seeds": violating,
        "sample_violations": samples,
    }
    _emit(_json_text(summary), p["output"])


@cli.command("profile")
@click.option("--weight", default=None, metavar="FAMILY:PARAMS",
              help="Weight configuration (required).")
@click.option("--kind", default="vrrw", show_default=True, metavar="KIND",
              help="Walk kind: vrrw, reflected, tilde, or breve.")
@click.option("--steps", default="1000000", show_default=True, metavar="N",
              help="Number of steps (>= 1).")
@click.option("--seed", default="0", show_default=True, metavar="S",
              help="Seed of the uniform field (unsigned 64-bit).")
@click.option("--gamma", default="0.3", show_default=True, metavar="G",
              help="Origin exit probability for breve (in (0, 1/2)).")
@click.option("--i-max", default="", metavar="I",
              help="Largest peak distance compared (default: classify the "
                   "weight and clip its upper index to 1..3).")
@click.option("--data-out", default="profile.dat", show_default=True,
              metavar="PATH", help="Plot-ready profile series output path.")
@click.option("--output", default="-", metavar="PATH", show_default=True,
              help="Summary JSON path, or - for stdout.")
@_CONFIG_OPT
@click.pass_context
def cmd_profile(ctx, **_kw) -> None:
    """Compare a run's recentred local-time profile with the envelopes."""
    p = _merged_params(ctx)
    v = _Validator()
    spec = v.weight_flag("weight", p["weight"])
    variant = v.kind_flag("kind", p["kind"])
    steps = v.int_flag("steps", p["steps"], minimum=1)
    seed = v.int_flag("seed", p["seed"], minimum=0, maximum=(1 << 64) - 1)
    gamma = v.float_flag("gamma", p["gamma"], strict_min=0.0, strict_max=0.5)
    i_max = (v.int_flag("i-max", p["i_max"], minimum=1, maximum=4)
             if str(p["i_max"]).strip() != "" else None)
    kind = _make_kind(v, variant, spec, gamma, None, None)
    v.finish()

    from .experiments import profile_compare
    from .operators import index_limits, psi_profile
    if i_max is None:
        lims = index_limits(spec)
        i_max = 2 if lims.i_plus is None else max(1, min(int(lims.i_plus), 3))
    psi = psi_profile(spec, i_max)
    run = walks.run_walk(kind, None, seed, steps)
    prof = profile_compare(run, psi)
    prof.to_gnuplot(p["data_out"] + ".tmp")
    os.replace(p["data_out"] + ".tmp", p["data_out"])
    summary = {
        "weight": spec.label,
        "kind": kind.label,
        "seed": seed,
        "n_steps": steps,
        "center": prof.center,
        "rows": prof.rows,
        "data_file": p["data_out"],
    }
    _emit(_json_text(summary), p["output"])


@cli.command("verify")
@click.option("--weight", default=None, metavar="FAMILY:PARAMS",
              help="Weight configuration (required).")
@click.option("--steps", default="100000", show_default=True, metavar="N",
              help="Steps per self-check run (>= 1).")
@click.option("--seeds", default="0..9", show_default=True, metavar="LIST",
              help="Seed list: N, A..B, or comma-separated mix.")
@click.option("--output", default="-", metavar="PATH", show_default=True,
              help="Report JSON path, or - for stdout.")
@_CONFIG_OPT
@click.pass_context
def cmd_verify(ctx, **_kw) -> None:
    """Self-checks: weight assumptions, exact identity, ledger invariants."""
    p = _merged_params(ctx)
    v = _Validator()
    spec = v.weight_flag("weight", p["weight"])
    steps = v.int_flag("steps", p["steps"], minimum=1)
    seeds = v.seeds_flag("seeds", p["seeds"])
    v.finish()

    from .weights import check_assumption
    from .experiments import pathwise_identity_check
    rep = check_assumption(spec)
    five = walks.reflected_vrrw(spec, floor=0, ceiling=4)
    drift = max(pathwise_identity_check(walks.run_walk(five, None, s, steps))
                for s in seeds)
    invariant_failures = []
    for s in seeds:
        run = walks.run_walk(walks.vrrw_z(spec), None, s, min(steps, 10_000))
        led, init = run.ledger, run.initial
        added = sum(led.z.values()) - sum(init.z.values())
        if added != run.step_count + 1:
            invariant_failures.append(f"seed {s}: conservation broken")
        for x, cnt in led.n_edge.items():
            if cnt > led.z.get(x + 1, 0):
                invariant_failures.append(f"seed {s}: edge bound broken at {x}")
    report = {
        "weight": spec.label,
        "assumption": {
            "monotone": rep.monotone,
            "slow_variation_ratio": rep.slow_variation_ratio,
            "ell_eventually_nondecreasing": rep.ell_eventually_nondecreasing,
        },
        "identity_max_drift": drift,
        "identity_ok": drift <= 1e-8,
        "ledger_invariants_ok": not invariant_failures,
        "invariant_failures": invariant_failures,
        "n_seeds": len(seeds),
        "steps": steps,
    }
    _emit(_json_text(report), p["output"])
    if not (report["identity_ok"] and report["ledger_invariants_ok"]
            and rep.monotone):
        raise RuntimeError("verification failed (see report)")


@cli.command("campaign")
@click.option("--weights", default=None, metavar="W1,W2,...",
              help="Comma-separated weight configurations (required).")
@click.option("--kinds", default="vrrw", show_default=True, metavar="K1,K2,...",
              help="Comma-separated walk kinds (vrrw, reflected, tilde, breve).")
@click.option("--seeds", default="0..49", show_default=True, metavar="LIST",
              help="Seed list: N, A..B, or comma-separated mix.")
@click.option("--steps", default="100000", show_default=True, metavar="N",
              help="Steps per run (>= 1).")
@click.option("--gamma", default="0.3", show_default=True, metavar="G",
              help="Origin exit probability for breve walks (in (0, 1/2)).")
@click.option("--pairs", default="", metavar="A:B,C:D",
              help="Coupling pairs low:high run per weight (default: none).")
@click.option("--pair-steps", default="10000", show_default=True, metavar="N",
              help="Steps per coupling run (>= 1).")
@click.option("--identity/--no-identity", "identity", default=False,
              show_default=True,
              help="Also run the five-site identity drift per weight.")
@click.option("--identity-steps", default="100000", show_default=True,
              metavar="N", help="Steps per identity-check run (>= 1).")
@click.option("--threads", default="", metavar="T",
              help="Worker threads (default: VRRW_LAB_THREADS, then CPU count).")
@click.option("--output-dir", default=None, metavar="DIR",
              help="Directory for report.json, run CSVs, profile data "
                   "(required).")
@_CONFIG_OPT
@click.pass_context
def cmd_campaign(ctx, **_kw) -> None:
    """Fan a (weight x kind x seed) campaign out to a worker pool."""
    p = _merged_params(ctx)
    v = _Validator()
    weights = [w.strip() for w in str(p["weights"] or "").split(",")
               if w.strip()]
    if not weights:
        v.fail("--weights: at least one weight configuration is required")
    kind_names = []
    for part in str(p["kinds"] or "").split(","):
        part = part.strip()
        if not part:
            continue
        variant = v.kind_flag("kinds", part)
        if variant:
            kind_names.append(variant)
    seeds = v.seeds_flag("seeds", p["seeds"])
    steps = v.int_flag("steps", p["steps"], minimum=1)
    gamma = v.float_flag("gamma", p["gamma"], strict_min=0.0, strict_max=0.5)
    pairs = []
    for part in str(p["pairs"] or "").split(","):
        part = part.strip()
        if not part:
            continue
        bits = part.split(":")
        if len(bits) != 2:
            v.fail(f"--pairs: expected LOW:HIGH, got {part!r}")
            continue
        lo = v.kind_flag("pairs", bits[0])
        hi = v.kind_flag("pairs", bits[1])
        if lo and hi:
            pairs.append((lo, hi))
    pair_steps = v.int_flag("pair-steps", p["pair_steps"], minimum=1)
    identity_steps = v.int_flag("identity-steps", p["identity_steps"],
                                minimum=1)
    threads = (v.int_flag("threads", p["threads"], minimum=1)
               if str(p["threads"]).strip() != "" else None)
    if not p["output_dir"]:
        v.fail("--output-dir: an output directory is required")
    v.finish()

    from .experiments import CampaignConfig, campaign
    config = CampaignConfig(
        weights=weights, kinds=kind_names, seeds=list(seeds or []),
        n_steps=steps, gamma=gamma, pairs=pairs, pair_steps=pair_steps,
        identity_checks=bool(p["identity"]), identity_steps=identity_steps,
        threads=threads)
    errors = config.validate()
    if errors:
        raise ValidationFailure(errors)
    campaign(config, output_dir=p["output_dir"])
    click.echo(os.path.join(p["output_dir"], "report.json"))


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------

def run_cli(argv=None) -> int:
    """Run the CLI; returns the exit status instead of raising SystemExit."""
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        cli.main(args=args, prog_name="vrrwlab", standalone_mode=False)
    except ValidationFailure as exc:
        for line in exc.errors:
            click.echo(f"error: {line}", err=True)
        return 2
    except click.UsageError as exc:
        exc.show()
        return 2
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        return 1
    except Exception as exc:
        click.echo(f"runtime error: {exc}", err=True)
        return 1
    return 0


def main() -> None:
    raise SystemExit(run_cli())


if __name__ == "__main__":
    main()
