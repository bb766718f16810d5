"""Command-line runner: ``multiconn {analytic,simulate,sweep,reproduce}``.

Exit codes: 0 success, 1 usage or config error, 2 numeric failure,
3 a reproduction check out of tolerance.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import analytic, degree, failures, plots, reproduce, simulator, specialfn
from .config import ExperimentSpec, Mode, Output, load_config
from .simulator import DESK_REGION, FULL_REGION

log = logging.getLogger("multiconn")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_REPRO = 0, 1, 2, 3
SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config file")
    common.add_argument("--out", default="out", help="output directory (default: ./out)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--replications", type=int, help="override the number of replications")
    scale = common.add_mutually_exclusive_group()
    scale.add_argument("--desk-scale", dest="scale", action="store_const", const="desk",
                       help="500 m x 500 m region (default)")
    scale.add_argument("--full-scale", dest="scale", action="store_const", const="full",
                       help="1500 m x 1500 m region")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="multiconn", description="Capacity and reliability of k-nearest multi-connectivity.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("analytic", parents=[common], help="closed-form capacities and failure analytics")
    sub.add_parser("simulate", parents=[common], help="Monte-Carlo simulation")
    sub.add_parser("sweep", parents=[common], help="run the config's [sweep] section")
    rp = sub.add_parser("reproduce", parents=[common], help="regenerate a figure or table with checks")
    rp.add_argument("figure", choices=sorted(reproduce.FIGURES) + ["all"])
    return p


# -- helpers -------------------------------------------------------------------

def resolve_spec(args) -> ExperimentSpec:
    spec = load_config(args.config) if args.config else ExperimentSpec()
    changes = {}
    if args.seed is not None:
        if args.seed < 0:
            raise UsageError("--seed must be non-negative")
        changes["seed"] = args.seed
    if args.replications is not None:
        if args.replications < 1:
            raise UsageError("--replications must be >= 1")
        changes["replications"] = args.replications
    if args.scale is not None:
        base = DESK_REGION if args.scale == "desk" else FULL_REGION
        changes["region"] = replace(base, boundary=spec.region.boundary)
    return replace(spec, **changes) if changes else spec


class Writer:
    """Writes outputs under one directory, each with a JSON sidecar holding the spec."""

    def __init__(self, out_dir, spec: ExperimentSpec, command: str):
        self.out_dir = out_dir
        self.spec = spec
        self.command = command
        os.makedirs(out_dir, exist_ok=True)
        self.written = []

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def _sidecar(self, name):
        meta = {"schema_version": SCHEMA_VERSION, "file": name, "command": self.command,
                "seed": self.spec.seed, "spec": self.spec.to_dict()}
        with open(self.path(name + ".spec.json"), "w") as fh:
            json.dump(meta, fh, indent=2)

    def csv(self, name, rows):
        if Output.CSV not in self.spec.outputs or not rows:
            return
        with open(self.path(name), "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            for r in rows:
                w.writerow({k: _plain(v) for k, v in r.items()})
        self._done(name)

    def json(self, name, doc, force=False):
        if Output.JSON not in self.spec.outputs and not force:
            return
        doc = {"schema_version": SCHEMA_VERSION, **doc}
        with open(self.path(name), "w") as fh:
            json.dump(doc, fh, indent=2, default=_plain)
        self._done(name)

    def svg(self, name, panels, title=None):
        if Output.SVG not in self.spec.outputs:
            return
        plots.line_panels(self.path(name), panels, title)
        self._done(name)

    def _done(self, name):
        self._sidecar(name)
        self.written.append(name)
        log.info("wrote %s", self.path(name))


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, float):
        return repr(v)
    return v


# -- commands --------------------------------------------------------------------

def _analytic_rows(spec: ExperimentSpec, sweep_value=None):
    p = spec.params
    rows = []
    for j in range(1, p.k + 1):
        ex = analytic.expected_log_snr_exact(j, p)
        ap = analytic.expected_log_snr_approx(j, p)
        rows.append({"sweep_value": sweep_value, "k": p.k, "j": j, "e_log2_snr_exact": ex.value,
                     "error_bound": ex.error_bound, "e_log2_snr_approx": ap.value,
                     "approx_valid": ap.valid, "capacity_exact": p.bandwidth_factor * ex.value})
    return rows


def _analytic_summary(spec: ExperimentSpec):
    p = spec.params
    out = {"sum_capacity_exact": analytic.expected_sum_capacity(p).sum,
           "sum_capacity_approx": analytic.expected_sum_capacity(p, "approx").sum}
    if p.k in degree.SHAPE_CONSTANTS:
        # E[1/D*] with empty BSs excluded from the sum, next to the idealised 1/(k lambda)
        m = degree.DegreeModel.from_params(p)
        out.update(mean_inverse_degree=degree.size_biased_inverse_moment(m, 0.0),
                   mean_inverse_degree_ideal=1.0 / m.mean)
    if spec.failure is not None:
        fa = failures.analyze(p, spec.failure)
        out.update(failure_sum_capacity=fa.expected_sum_capacity, outage_probability=fa.outage_probability,
                   per_link_fail_prob=list(fa.per_link_fail_prob))
    return out


def cmd_analytic(spec, w: Writer):
    rows, summaries = [], []
    sweep_path = spec.sweep[0] if spec.sweep else None
    points = spec.expand()
    values = spec.sweep[1] if spec.sweep else [None]
    for v, s in zip(values, points):
        rows += _analytic_rows(s, v)
        summaries.append({"sweep_value": v, **_analytic_summary(s)})
    w.csv("analytic.csv", rows)
    w.json("analytic.json", {"sweep_path": sweep_path, "results": summaries})
    if spec.sweep:
        w.svg("analytic.svg", [{"xlabel": sweep_path, "ylabel": "E[C_sum] [bit/s]",
                                "series": [{"x": list(values), "y": [r["sum_capacity_exact"] for r in summaries],
                                            "label": "exact"},
                                           {"x": list(values), "y": [r["sum_capacity_approx"] for r in summaries],
                                            "label": "high-SNR approx", "style": "markers"}]}])
    for r in summaries:
        print(" ".join(f"{k}={_plain(v)}" for k, v in r.items() if not isinstance(v, list)))
    return EXIT_OK


def cmd_simulate(spec, w: Writer):
    reports = []
    values = spec.sweep[1] if spec.sweep else [None]
    for v, s in zip(values, spec.expand()):
        rep = simulator.run(s.sim_config())
        reports.append((v, rep))
        tag = "" if v is None else f"_{v}"
        if Output.CSV in spec.outputs:
            rep.to_csv(w.path(f"simulate{tag}.csv"))
            w._done(f"simulate{tag}.csv")
        if Output.JSON in spec.outputs:
            rep.to_json(w.path(f"simulate{tag}.json"))
            w._done(f"simulate{tag}.json")
        print(f"sweep_value={v} mean_capacity={rep.mean_capacity!r} outage_fraction={rep.outage_fraction!r} "
              f"jain_index={rep.jain_index!r} users={rep.per_user_capacity.size}")
    w.svg("simulate_cdf.svg", [{"xlabel": "C_sum [bit/s]", "ylabel": "CDF",
                                "series": [{"x": r.cdf_samples[:, 0], "y": r.cdf_samples[:, 1], "style": "step",
                                            "label": "all" if v is None else f"{spec.sweep[0]}={v}"}
                                           for v, r in reports]}])
    return EXIT_OK


def cmd_sweep(spec, w: Writer):
    if spec.sweep is None:
        raise UsageError("the sweep command needs a [sweep] section in the config")
    path, values = spec.sweep
    rows = []
    for v, s in zip(values, spec.expand()):
        row = {"sweep_value": v}
        if spec.mode in (Mode.ANALYTIC, Mode.BOTH):
            summ = _analytic_summary(s)
            row["analytic_capacity"] = summ.get("failure_sum_capacity", summ["sum_capacity_exact"])
            row["analytic_outage"] = summ.get("outage_probability", 0.0)
        if spec.mode in (Mode.SIMULATE, Mode.BOTH):
            rep = simulator.run(s.sim_config())
            row.update(sim_capacity=rep.mean_capacity, sim_outage=rep.outage_fraction, jain_index=rep.jain_index)
        rows.append(row)
        print(" ".join(f"{k}={_plain(x)}" for k, x in row.items()))
    w.csv("sweep.csv", rows)
    w.json("sweep.json", {"sweep_path": path, "rows": rows})
    series = []
    if "analytic_capacity" in rows[0]:
        series.append({"x": list(values), "y": [r["analytic_capacity"] for r in rows], "label": "analytic"})
    if "sim_capacity" in rows[0]:
        series.append({"x": list(values), "y": [r["sim_capacity"] for r in rows], "label": "simulated",
                       "style": "markers"})
    w.svg("sweep.svg", [{"xlabel": path, "ylabel": "E[C_sum] [bit/s]", "series": series}])
    return EXIT_OK


def cmd_reproduce(spec, w: Writer, figure, replications_given):
    names = sorted(reproduce.FIGURES) if figure == "all" else [figure]
    status = EXIT_OK
    for name in names:
        fn, default_reps = reproduce.FIGURES[name]
        reps = spec.replications if replications_given else default_reps
        run_spec = replace(spec, replications=reps)
        w.spec = run_spec
        ctx = reproduce.Context(run_spec.params, run_spec.region, reps, run_spec.seed)
        res = fn(ctx)
        w.csv(f"{name}.csv", res.rows)
        w.svg(f"{name}.svg", res.panels, res.title)
        w.json(f"{name}.verdict.json", {"figure": name, "pass": res.passed,
                                        "checks": [c.as_dict() for c in res.checks]}, force=True)
        if hasattr(res, "table"):
            with open(w.path(f"{name}.txt"), "w") as fh:
                fh.write(res.table.to_text())
            w._done(f"{name}.txt")
        for c in res.checks:
            print(f"{'PASS' if c.passed else 'FAIL'}  {name}: {c.name} expected={_fmt(c.expected)} "
                  f"got={_fmt(c.got)} tol={c.tolerance:g}")
        print(f"{name}: {'PASS' if res.passed else 'FAIL'}")
        if not res.passed:
            status = EXIT_REPRO
    return status


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        spec = resolve_spec(args)
        w = Writer(args.out, spec, " ".join(["multiconn"] + list(argv if argv is not None else sys.argv[1:])))
        if args.command == "analytic":
            return cmd_analytic(spec, w)
        if args.command == "simulate":
            return cmd_simulate(spec, w)
        if args.command == "sweep":
            return cmd_sweep(spec, w)
        return cmd_reproduce(spec, w, args.figure, args.replications is not None)
    except (ValueError, UsageError, OSError) as exc:
        print(f"multiconn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (specialfn.TruncationError, failures.QuadratureError, ArithmeticError, FloatingPointError) as exc:
        print(f"multiconn: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
