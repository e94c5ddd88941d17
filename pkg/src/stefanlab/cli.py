"""Command-line harness: configuration loading, dispatch, sweep
orchestration and artifact emission.

Configuration files are line-oriented ``key=value`` with ``[section]``
headers.  Artifacts are CSV files with "#"-prefixed metadata headers and
17-significant-digit reals, so bodies are byte-identical across runs of
the same config, plus small JSON summaries.

Exit codes: 0 success, 2 configuration or validation error, 3 numerical
non-convergence, 4 internal invariant breach.
"""

import argparse
import hashlib
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import __version__, coeffexpr, eigen, freeboundary, semiwave, thresholds
from .coeffmodel import CoefficientField, ProblemSpec, validate
from .errors import (BoundViolated, BracketInvalid, ConfigError,
                     DomainNotLargeEnough, ExpressionError, ExprError,
                     MissingKey, NoConvergence, NoSignChange, NotSpreading,
                     StefanLabError, StepSizeTooLarge, TooManyUndecided,
                     TruncationTooSmall, TypeMismatch, UnknownKey)
from .thresholds import ScaledProfile

log = logging.getLogger("stefanlab")

MAX_CONFIG_BYTES = 1 << 20

COMMANDS = ("simulate", "eigen", "hstar", "speed", "mu-star", "sigma0",
            "sweep", "criteria")

# schema: section -> key -> (type, default); default None means required
# when the section is active for the chosen command
_SCHEMA = {
    "run": {"command": ("str", None), "seed": ("int", 0), "out": ("str", ".")},
    "field": {"alpha": ("expr", None), "gamma": ("expr", "0"),
              "beta": ("expr", "1"), "T": ("float", 1.0)},
    "problem": {"d": ("float", None), "mu": ("float", None),
                "h0": ("float", None), "N": ("int", 2), "u0": ("expr", "")},
    "numerics": {"n": ("int", 256), "dt": ("float", 2e-3),
                 "t_max": ("float", 50.0), "tol": ("float", 1e-6),
                 "sample_every": ("float", 0.25)},
    "eigen": {"R": ("floatlist", None)},
    "hstar": {"r_lo": ("float", None), "r_hi": ("float", None),
              "tol": ("float", 1e-3)},
    "speed": {"r_far": ("float", 50.0), "tol": ("float", 1e-6)},
    "mu_star": {"mu_lo": ("float", None), "mu_hi": ("float", None),
                "tol": ("float", 0.01)},
    "sigma0": {"zeta": ("expr", ""), "sigma_lo": ("float", None),
               "sigma_hi": ("float", None), "tol": ("float", 0.01)},
    "sweep": {"axis1": ("str", None), "axis1_values": ("floatlist", None),
              "axis2": ("str", None), "axis2_values": ("floatlist", None)},
    "criteria": {"kind": ("str", None)},
}

# sections whose required keys must be present for each command
_ACTIVE = {
    "simulate": ("run", "field", "problem"),
    "eigen": ("run", "field", "problem", "eigen"),
    "hstar": ("run", "field", "problem", "hstar"),
    "speed": ("run", "field", "problem"),
    "mu-star": ("run", "field", "problem", "mu_star"),
    "sigma0": ("run", "field", "problem", "sigma0"),
    "sweep": ("run", "field", "problem", "sweep"),
    "criteria": ("run", "field", "problem", "criteria"),
}

SWEEP_AXES = ("d", "mu", "h0", "sigma")


@dataclass
class RunConfig:
    command: str
    values: dict = dc_field(default_factory=dict)   # section -> key -> value

    def get(self, section, key):
        return self.values[section][key]


def _fmt(x):
    if isinstance(x, float) or isinstance(x, np.floating):
        return "%.17g" % x
    return str(x)


def _coerce(section, key, kind, raw):
    if kind == "str":
        return raw
    if kind == "int":
        try:
            return int(raw)
        except ValueError:
            raise TypeMismatch(key, "int", raw)
    if kind == "float":
        try:
            return float(raw)
        except ValueError:
            raise TypeMismatch(key, "float", raw)
    if kind == "floatlist":
        try:
            return tuple(float(p) for p in raw.split(",") if p.strip())
        except ValueError:
            raise TypeMismatch(key, "comma-separated floats", raw)
    if kind == "expr":
        if raw:
            try:
                coeffexpr.parse(raw)
            except ExprError as exc:
                raise ExpressionError(key, exc)
        return raw
    raise AssertionError(kind)


def _parse_lines(text):
    """Raw (section, key, value) triples from config text."""
    out = []
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ConfigError("line %d: expected key=value, got %r" % (lineno, line))
        if section is None:
            raise ConfigError("line %d: key before any [section]" % lineno)
        key, _, value = line.partition("=")
        out.append((section, key.strip(), value.strip()))
    return out


def loads_config(text):
    errors = []
    failed = set()
    values = {s: {k: d for k, (_, d) in keys.items()}
              for s, keys in _SCHEMA.items()}
    for section, key, raw in _parse_lines(text):
        if section not in _SCHEMA:
            errors.append(UnknownKey("%s.%s" % (section, key)))
            continue
        if key not in _SCHEMA[section]:
            errors.append(UnknownKey(key))
            continue
        kind = _SCHEMA[section][key][0]
        try:
            values[section][key] = _coerce(section, key, kind, raw)
        except ConfigError as exc:
            errors.append(exc)
            failed.add((section, key))

    command = values["run"]["command"]
    if command is None:
        errors.append(MissingKey("command"))
    elif command not in COMMANDS:
        errors.append(TypeMismatch("command", "one of %s" % (COMMANDS,), command))
    else:
        for section in _ACTIVE[command]:
            for key, (_, default) in _SCHEMA[section].items():
                if (default is None and values[section][key] is None
                        and (section, key) not in failed):
                    errors.append(MissingKey(key))

    if errors:
        if len(errors) == 1:
            raise errors[0]
        exc = ConfigError("%d configuration errors: %s"
                          % (len(errors), "; ".join(str(e) for e in errors)))
        exc.errors = errors
        raise exc
    return RunConfig(command=command, values=values)


def load_config(path):
    if not os.path.isfile(path):
        raise ConfigError("no such config file: %s" % path)
    if os.path.getsize(path) > MAX_CONFIG_BYTES:
        raise ConfigError("config file exceeds %d bytes" % MAX_CONFIG_BYTES)
    with open(path, "r", encoding="utf-8") as fh:
        return loads_config(fh.read())


def dump_config(config):
    """Canonical text form; loads_config(dump_config(c)) == c."""
    lines = []
    for section in _SCHEMA:
        lines.append("[%s]" % section)
        for key, (kind, _) in _SCHEMA[section].items():
            v = config.values[section][key]
            if v is None:
                continue
            if kind == "floatlist":
                lines.append("%s=%s" % (key, ",".join(_fmt(float(x)) for x in v)))
            elif kind == "float":
                lines.append("%s=%s" % (key, _fmt(float(v))))
            else:
                lines.append("%s=%s" % (key, v))
        lines.append("")
    return "\n".join(lines)


def config_hash(config):
    return hashlib.sha256(dump_config(config).encode("utf-8")).hexdigest()[:16]


def build_spec(config):
    v = config.values
    field = CoefficientField.from_expressions(
        alpha=v["field"]["alpha"], gamma=v["field"]["gamma"],
        beta=v["field"]["beta"], T=v["field"]["T"])
    p, num = v["problem"], v["numerics"]
    return ProblemSpec.build(field, N=p["N"], d=p["d"], mu=p["mu"],
                             h0=p["h0"], u0=p["u0"] or None,
                             n=num["n"], dt=num["dt"], t_max=num["t_max"],
                             tol=num["tol"], sample_every=num["sample_every"])


# --- artifact emission ---

class Artifacts:
    """Collector writing ``name.partial`` files, renamed on finalize().

    Metadata lines are "#"-prefixed so plain CSV readers skip them; the
    body below them is deterministic for a fixed config.
    """

    def __init__(self, out_dir, cfg_hash):
        self.out_dir = out_dir
        self.cfg_hash = cfg_hash
        self.t0 = time.monotonic()
        self.pending = []
        os.makedirs(out_dir, exist_ok=True)

    def _meta(self):
        return ["# stefanlab %s" % __version__,
                "# config %s" % self.cfg_hash,
                "# wall %.3fs" % (time.monotonic() - self.t0)]

    def _open(self, name):
        path = os.path.join(self.out_dir, name)
        self.pending.append(path)
        return open(path + ".partial", "w", encoding="utf-8")

    def csv(self, name, header, rows):
        with self._open(name) as fh:
            for line in self._meta():
                fh.write(line + "\n")
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(x) for x in row) + "\n")

    def json(self, name, obj):
        obj = dict(obj)
        obj["meta"] = {"version": __version__, "config": self.cfg_hash}
        with self._open(name) as fh:
            json.dump(obj, fh, indent=2, sort_keys=True, default=float)
            fh.write("\n")

    def finalize(self):
        for path in self.pending:
            os.replace(path + ".partial", path)


def _threshold_rows(parameter, res):
    return [(parameter, res.value, res.bracket[0], res.bracket[1],
             res.evaluations, res.undecided_encounters)]


# --- worker functions (top-level for pickling) ---

def _sweep_cell(args):
    spec, t_max, v1, v2 = args
    try:
        traj = freeboundary.simulate(spec, t_max=t_max)
        out = freeboundary.classify_outcome(traj, spec)
        return (v1, v2, out.verdict, out.t_decided)
    except StefanLabError as exc:
        log.warning("sweep cell (%g, %g) failed: %s", v1, v2, exc)
        return (v1, v2, "Error", math.nan)


def _eigen_point(args):
    d, field, R, T, N, n = args
    res = eigen.principal_eigenvalue(d, field, R, T, N=N, n=n)
    return (R, res.lambda1, res.rho, res.iterations, res.residual)


def _cell_spec(spec, axis, value):
    if axis == "sigma":
        return spec.with_(u0=ScaledProfile(spec.u0, value))
    if axis == "h0":
        # stretch the profile so it stays admissible on the new span
        return thresholds.respan_initial_profile(spec, value)
    return spec.with_(**{axis: value})


# --- command implementations ---

def _cmd_simulate(config, spec, arts, horizon_scale):
    traj = freeboundary.simulate(spec, t_max=horizon_scale * spec.numerics.t_max)
    out = freeboundary.classify_outcome(traj, spec)
    arts.csv("trajectory.csv", ("t", "h", "h_prime", "u_sup"),
             zip(traj.t, traj.h, traj.h_prime, traj.u_sup))
    rows = []
    for snap in traj.snapshots:
        for r, u in zip(snap.r(), snap.u):
            rows.append((snap.t, r, u))
    arts.csv("snapshots.csv", ("t", "r", "u"), rows)
    ev = out.evidence
    arts.json("outcome.json", {
        "verdict": out.verdict, "t_decided": out.t_decided,
        "criterion": ev.criterion, "h_star": ev.h_star,
        "h_final": ev.h_final, "u_sup_final": ev.u_sup_final})


def _cmd_eigen(config, spec, arts, jobs):
    Rs = config.get("eigen", "R")
    work = [(spec.d, spec.field, R, spec.field.T, spec.N, spec.numerics.n)
            for R in Rs]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_eigen_point, work))
    else:
        rows = [_eigen_point(w) for w in work]
    arts.csv("eigen_sweep.csv", ("R", "lambda1", "rho", "iterations", "residual"),
             rows)


def _cmd_hstar(config, spec, arts):
    v = config.values["hstar"]
    value = eigen.h_star(spec.d, spec.field, spec.field.T, r_lo=v["r_lo"],
                         r_hi=v["r_hi"], tol=v["tol"], N=spec.N,
                         n=spec.numerics.n)
    half = 0.5 * v["tol"]
    arts.csv("threshold.csv",
             ("parameter", "value", "lo", "hi", "evaluations",
              "undecided_encounters"),
             [("h_star", value, value - half, value + half, 0, 0)])


def _cmd_speed(config, spec, arts):
    v = config.values["speed"]
    r_far = v["r_far"]
    fld = spec.field

    class _FarField:
        def __init__(self, fn, r):
            self.fn, self.r = fn, r

        def __call__(self, t):
            return self.fn(t, self.r)

    a = _FarField(fld.growth, r_far)
    b = _FarField(fld.beta, r_far)
    res = semiwave.k0_fixed_point(spec.mu, a, b, spec.d, fld.T, tol=v["tol"])
    arts.json("speed.json", {
        "c": res.c, "bound": res.bound, "iterations": res.iterations,
        "residual": res.residual, "r_far": r_far,
        "k0": [float(x) for x in res.k0_phases]})


def _cmd_mu_star(config, spec, arts):
    v = config.values["mu_star"]
    res = thresholds.mu_star(spec, v["mu_lo"], v["mu_hi"], tol=v["tol"])
    arts.csv("threshold.csv",
             ("parameter", "value", "lo", "hi", "evaluations",
              "undecided_encounters"),
             _threshold_rows("mu_star", res))


def _cmd_sigma0(config, spec, arts):
    v = config.values["sigma0"]
    zeta = coeffexpr.ExprFunction(v["zeta"]) if v["zeta"] else spec.u0
    res = thresholds.sigma0(spec, zeta, v["sigma_lo"], v["sigma_hi"],
                            tol=v["tol"])
    arts.csv("threshold.csv",
             ("parameter", "value", "lo", "hi", "evaluations",
              "undecided_encounters"),
             _threshold_rows("sigma0", res))


def _cmd_sweep(config, spec, arts, jobs, horizon_scale):
    v = config.values["sweep"]
    a1, a2 = v["axis1"], v["axis2"]
    for ax in (a1, a2):
        if ax not in SWEEP_AXES:
            raise TypeMismatch("axis", "one of %s" % (SWEEP_AXES,), ax)
    t_max = horizon_scale * spec.numerics.t_max
    work = []
    for v1 in v["axis1_values"]:
        for v2 in v["axis2_values"]:
            cell = _cell_spec(_cell_spec(spec, a1, v1), a2, v2)
            work.append((cell, t_max, v1, v2))
    if jobs and jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_cell, work))
    else:
        rows = [_sweep_cell(w) for w in work]
    arts.csv("phase.csv", ("axis1", "axis2", "verdict", "t_decided"), rows)

    overlay = {"axis1": a1, "axis2": a2}
    try:
        overlay["h_star"] = eigen.h_star(spec.d, spec.field, spec.field.T,
                                         r_lo=0.05 * spec.h0, r_hi=8.0 * spec.h0,
                                         N=spec.N, n=128)
    except StefanLabError:
        overlay["h_star"] = None
    try:
        dth = eigen.d_thresholds(spec.field, spec.h0, spec.field.T,
                                 d_lo=1e-2 * spec.d, d_hi=1e2 * spec.d,
                                 N=spec.N, n=96)
        overlay["d_star"], overlay["d_upper"] = dth.d_star, dth.d_upper
    except StefanLabError:
        overlay["d_star"] = overlay["d_upper"] = None
    arts.json("overlay.json", overlay)


def _cmd_criteria(config, spec, arts):
    kind = config.get("criteria", "kind")
    rep = thresholds.criteria_experiment(kind, spec)
    arts.json("outcome.json", {
        "kind": rep.kind, "h_star": rep.h_star_value, "d_star": rep.d_star,
        "d_upper": rep.d_upper, "chosen": rep.chosen,
        "verdicts": list(rep.verdicts), "prediction": rep.prediction,
        "matches": rep.matches})


_NUMERIC_ERRORS = (NoConvergence, TooManyUndecided, NoSignChange,
                   BracketInvalid, DomainNotLargeEnough, TruncationTooSmall,
                   BoundViolated, NotSpreading, StepSizeTooLarge)


def run(config, out_dir=None, jobs=None, horizon_scale=1.0):
    """Dispatch a validated RunConfig; returns the process exit code."""
    if out_dir is None:
        out_dir = config.get("run", "out")
    if jobs is None:
        jobs = os.cpu_count() or 1
    np.random.seed(config.get("run", "seed") & 0x7FFFFFFF)
    spec = build_spec(config)
    report = validate(spec)
    if not report.ok:
        for viol in report.violations:
            log.error("validation: %s at %s: %s", viol.kind, viol.where,
                      viol.detail)
        return 2
    arts = Artifacts(out_dir, config_hash(config))
    try:
        cmd = config.command
        if cmd == "simulate":
            _cmd_simulate(config, spec, arts, horizon_scale)
        elif cmd == "eigen":
            _cmd_eigen(config, spec, arts, jobs)
        elif cmd == "hstar":
            _cmd_hstar(config, spec, arts)
        elif cmd == "speed":
            _cmd_speed(config, spec, arts)
        elif cmd == "mu-star":
            _cmd_mu_star(config, spec, arts)
        elif cmd == "sigma0":
            _cmd_sigma0(config, spec, arts)
        elif cmd == "sweep":
            _cmd_sweep(config, spec, arts, jobs, horizon_scale)
        elif cmd == "criteria":
            _cmd_criteria(config, spec, arts)
        else:
            raise ConfigError("unknown command %r" % cmd)
    except ConfigError as exc:
        log.error("%s", exc)
        return 2
    except _NUMERIC_ERRORS as exc:
        log.error("numerical failure: %s", exc)
        return 3
    except StefanLabError as exc:
        log.error("internal invariant breach: %s", exc)
        return 4
    arts.finalize()
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="stefanlab",
        description="Free-boundary invasion model laboratory")
    parser.add_argument("--config", required=True, help="configuration file")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--jobs", type=int, default=None,
                        help="worker budget for sweeps")
    parser.add_argument("--horizon-scale", type=float, default=1.0,
                        help="multiply the configured simulation horizon")
    parser.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)

    level = os.environ.get("STEFAN_LOG_LEVEL", "WARNING").upper()
    if args.verbose:
        level = "DEBUG"
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")

    try:
        config = load_config(args.config)
    except ConfigError as exc:
        log.error("%s", exc)
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    return run(config, out_dir=args.out, jobs=args.jobs,
               horizon_scale=args.horizon_scale)


if __name__ == "__main__":
    sys.exit(main())
