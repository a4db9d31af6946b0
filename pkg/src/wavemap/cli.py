"""``wavemap`` command line: evolve, fit, search, slice, info."""
import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__, kernels, snapshot
from . import diagnostics as dg
from .config import ConfigError, load as load_config, parse_window
from .evolution import CONSTRAINT_COLUMNS, ENERGY_COLUMNS, ORIGIN_COLUMNS, SLICE_COLUMNS, evolve
from .fitting import NonConvergence, default_window, fit_scaling
from .grid import Grid
from .initial_data import build_initial_state
from .search import (TRACE_COLUMNS, BracketInvalid, BudgetExhausted, RunRecord, SearchConfig, bisect,
                     hover_growth_ok, max_bisection_runs, record_from_result, run_evolution,
                     threshold_classifier)
from .series_io import format_value, header_cell, read_series, write_csv

log = logging.getLogger("wavemap")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_SEARCH = 3


def _json_default(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    raise TypeError(f"not serializable: {type(v)}")


def _clean(obj):
    """NaN and inf are not JSON; store them as strings."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def write_json(path, data):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_clean(data), fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def write_report(path, values: dict):
    with open(path, "w", encoding="utf-8") as fh:
        for k, v in values.items():
            fh.write(f"{k} = {format_value(v)}\n")


def write_run_artifacts(out, result, provenance, extra=None):
    os.makedirs(out, exist_ok=True)
    write_csv(os.path.join(out, "origin.csv"), ORIGIN_COLUMNS, result.origin_rows, provenance)
    write_csv(os.path.join(out, "energy.csv"), ENERGY_COLUMNS, result.energy_rows, provenance)
    write_csv(os.path.join(out, "constraints.csv"), CONSTRAINT_COLUMNS, result.constraint_rows, provenance)
    if result.slice_rows:
        write_csv(os.path.join(out, "slices.csv"), SLICE_COLUMNS, result.slice_rows, provenance)
    summary = result.summary()
    summary.update(extra or {})
    write_json(os.path.join(out, "summary.json"), summary)
    return summary


# -- evolve -----------------------------------------------------------------

def cmd_evolve(args):
    cfg = load_config(args.config)
    chash = cfg.hash()
    provenance = f"{__version__} config_hash={chash.hex()}"
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "config.ini"), "w", encoding="utf-8") as fh:
        fh.write(cfg.to_ini())

    extra = {"config_hash": chash.hex(), "version": __version__}
    if args.resume:
        state, header = snapshot.read(args.resume)
        if header.config_hash != chash:
            raise ConfigError(f"snapshot {args.resume} was written by a different config")
        if header.N != cfg.N:
            raise ConfigError(f"snapshot N={header.N} does not match config N={cfg.N}")
        extra["resumed_from_step"] = header.step
    else:
        state = build_initial_state(cfg.initial, Grid(cfg.N))

    ckdir = os.path.join(args.out, "checkpoints")

    def on_checkpoint(st):
        os.makedirs(ckdir, exist_ok=True)
        snapshot.write(os.path.join(ckdir, f"step_{st.step:08d}.wmap"), st, chash)

    result = evolve(state, cfg.rattle(), cfg.evolution_options(), on_checkpoint=on_checkpoint)
    snapshot.write(os.path.join(args.out, "final.wmap"), result.state, chash)

    if cfg.fit_window is not None:
        try:
            fit = fit_scaling(result.scaling_series(), cfg.fit_window)
            write_report(os.path.join(args.out, "fit.txt"), fit.as_dict())
            extra.update(fit_T=fit.T, fit_b=fit.b, fit_residual=fit.residual)
        except (ValueError, NonConvergence) as exc:
            log.warning("fit over %s failed: %s", cfg.fit_window, exc)
            extra["fit_error"] = str(exc)

    summary = write_run_artifacts(args.out, result, provenance, extra)
    print(f"outcome={summary['outcome']} t={format_value(summary['t_final'])} steps={summary['steps']}")
    return EXIT_OK


# -- fit ----------------------------------------------------------------------

def cmd_fit(args):
    series = read_series(args.series, dg.GAUSS if args.method == "gauss" else dg.MEAN)
    window = default_window(series) if args.window == "auto" else parse_window(args.window)
    try:
        fit = fit_scaling(series, window, residual_ceiling=args.residual_ceiling)
    except (ValueError, NonConvergence) as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    values = fit.as_dict()
    values["method"] = series.method
    if args.out:
        write_report(args.out, values)
    print(f"T={format_value(fit.T)} b={format_value(fit.b)} residual={format_value(fit.residual)}")
    return EXIT_OK


# -- search -------------------------------------------------------------------

def run_key(A, B, N):
    return f"A={format_value(float(A))}_B={format_value(float(B))}_N={N}"


def cached_classifier(scfg: SearchConfig, runs_dir, resume, chash_hex):
    """Classifier that stores each run under ``runs_dir/<key>`` and reuses it on resume."""
    def classify(A, t_end):
        d = os.path.join(runs_dir, run_key(A, scfg.initial.B, scfg.N))
        path = os.path.join(d, "summary.json")
        if resume and os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                s = json.load(fh)
            if s.get("search_t_end") == t_end and s.get("search_outcome"):
                log.info("reusing %s", d)
                flip = s.get("search_flip_time")
                return RunRecord(A, s["search_outcome"], flip if isinstance(flip, float) else None,
                                 float(s.get("hover_duration", 0.0)), t_end, s.get("search_note", ""))
        try:
            result = run_evolution(A, scfg, t_end)
        except (FloatingPointError, ValueError, RuntimeError) as exc:
            log.error("A=%.17g failed: %s", A, exc)
            return RunRecord(A, "inconclusive", None, 0.0, t_end, f"error: {exc}")
        rec = record_from_result(A, result, t_end)
        write_run_artifacts(d, result, f"{__version__} config_hash={chash_hex}", {
            "A": A, "search_outcome": rec.outcome, "search_t_end": t_end,
            "search_flip_time": rec.flip_time, "search_note": rec.note, "config_hash": chash_hex})
        return rec
    return classify


def _self_test():
    threshold, tol = 0.5, 1e-6
    scfg = SearchConfig(A_lo=0.0, A_hi=1.0, tol_A=tol, max_runs=64)
    A, trace = bisect(scfg, threshold_classifier(threshold))
    runs = len(trace) - 2
    ok = abs(A - threshold) <= tol and runs <= max_bisection_runs(0.0, 1.0, tol) + 1
    print(f"self-test: A*={format_value(A)} bisection_runs={runs} {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAILED


def cmd_search(args):
    if args.self_test:
        return _self_test()
    if not args.config or not args.out:
        raise ConfigError("search needs --config and --out (or --self-test)")
    cfg = load_config(args.config)
    scfg = cfg.search_config()
    chash = cfg.hash_hex()
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "config.ini"), "w", encoding="utf-8") as fh:
        fh.write(cfg.to_ini())
    provenance = f"{__version__} config_hash={chash}"
    trace_path = os.path.join(args.out, "trace.csv")
    rows = []

    def on_record(entry):
        rows.append(entry)
        r = entry.record
        write_csv(trace_path, TRACE_COLUMNS,
                  [(e.run, e.record.A, e.record.outcome,
                    math.nan if e.record.flip_time is None else e.record.flip_time,
                    e.record.hover_duration, e.record.t_end, e.bracket[0], e.bracket[1], e.record.note)
                   for e in rows], provenance)
        print(f"run {entry.run}: A={format_value(r.A)} {r.outcome}", flush=True)

    classifier = cached_classifier(scfg, os.path.join(args.out, "runs"), args.resume, chash)
    try:
        A_star, trace = bisect(scfg, classifier, on_record=on_record)
    except (BracketInvalid, BudgetExhausted) as exc:
        print(f"search failed: {exc}", file=sys.stderr)
        return EXIT_SEARCH
    lo, hi = trace.entries[-1].bracket
    ok, durations = hover_growth_ok(trace)
    write_json(os.path.join(args.out, "search_summary.json"), {
        "A_star": A_star, "bracket_lo": lo, "bracket_hi": hi, "runs": len(trace),
        "hover_growth_ok": ok, "hover_durations": durations, "config_hash": chash,
        "version": __version__})
    print(f"A*={format_value(A_star)} bracket=[{format_value(lo)}, {format_value(hi)}]")
    return EXIT_OK


# -- slice / info -------------------------------------------------------------

def cmd_slice(args):
    state, header = snapshot.read(args.snapshot)
    w = state.q[2]
    if args.rescale is None:
        prof = dg.extract_slice(w, args.direction, header.t)
        columns, rows = ("r", "w"), zip(prof.radii, prof.w_values)
    else:
        prof = dg.rescaled_profile(w, args.rescale, args.direction, time=header.t)
        columns, rows = ("r_over_s", "w"), zip(prof.radii, prof.w_values)
    provenance = f"{__version__} config_hash={header.hash_hex} t={format_value(header.t)} direction={prof.direction}"
    rows = [tuple(float(v) for v in r) for r in rows]
    if args.out:
        write_csv(args.out, columns, rows, provenance)
    else:
        print(f"# wavemap {provenance}")
        print(",".join(header_cell(c) for c in columns))
        for r in rows:
            print(",".join(format_value(v) for v in r))
    return EXIT_OK


def cmd_info(args):
    h = snapshot.read_header(args.snapshot)
    print(f"version = {h.version}")
    print(f"N = {h.N}")
    print(f"t = {format_value(h.t)}")
    print(f"step = {h.step}")
    print(f"config_hash = {h.hash_hex}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="wavemap", description="2+1 wave maps into S^2 on a symmetric quarter grid")
    p.add_argument("--backend", choices=("cython", "python"), help="kernel backend (default: fastest available)")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("evolve", help="evolve one configuration")
    e.add_argument("--config", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--resume", help="continue from a checkpoint snapshot")
    e.set_defaults(func=cmd_evolve)

    f = sub.add_parser("fit", help="fit the collapse law to a scaling series")
    f.add_argument("--series", required=True, help="origin.csv or a two-column t,s file")
    f.add_argument("--window", default="auto", help="t_lo:t_hi, or 'auto' for the last 20%% of the descent")
    f.add_argument("--out", help="key = value report file")
    f.add_argument("--method", choices=("gauss", "mean"), default="gauss")
    f.add_argument("--residual-ceiling", type=float, default=None)
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("search", help="bisect for the critical amplitude")
    s.add_argument("--config")
    s.add_argument("--out")
    s.add_argument("--resume", action="store_true", help="reuse completed run directories")
    s.add_argument("--self-test", action="store_true", help="bisect a synthetic classifier")
    s.set_defaults(func=cmd_search)

    sl = sub.add_parser("slice", help="w along the x-axis or the diagonal from a snapshot")
    sl.add_argument("--snapshot", required=True)
    sl.add_argument("--direction", choices=("x", "diag"), required=True)
    sl.add_argument("--rescale", type=float, help="sample w(s r) on r grid radii")
    sl.add_argument("--out")
    sl.set_defaults(func=cmd_slice)

    i = sub.add_parser("info", help="print a snapshot header")
    i.add_argument("--snapshot", required=True)
    i.set_defaults(func=cmd_info)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.backend:
            kernels.set_backend(args.backend)
        return args.func(args)
    except (ConfigError, snapshot.SnapshotError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
