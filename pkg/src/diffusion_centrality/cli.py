"""Command-line entry point: ``diffcent <subcommand> [flags]``.

Exit codes: 0 success, 1 usage error, 2 bad input data, 3 numeric failure
(an alpha outside a metric's domain, or non-convergence with ``--strict``).
Machine-readable outputs carry full double precision; console summaries
use 6 significant digits. Every run writes a JSON manifest, into ``--out``
when given and to stderr otherwise.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .approx import approximate_centrality
from .centrality import (CentralityConfig, ConvergenceBoundError, alpha_centrality,
                         normalized_alpha_centrality, pagerank)
from .diffusion import DiffusionConfig, run_conservative, run_nonconservative
from .epidemic import EpidemicParams, sis_deterministic, sis_montecarlo
from .graph import GraphFormatError, dump_edge_list, load_edge_list, write_metadata
from .influence import (ActivityLogError, correlation_sweep, default_alpha_grid,
                        extract_cascade, influence_estimates, load_activity_log,
                        write_activity_log)
from .spectral import path_series, spectral_radius
from .synthetic import synth

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class NumericFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _Run:
    """Collects outputs and manifest data for one invocation."""

    def __init__(self, args):
        self.args = args
        self.out_dir = Path(args.out) if args.out else None
        self.inputs = {}
        self.outputs = []
        self.stdout = sys.stdout
        if self.out_dir:
            self.out_dir.mkdir(parents=True, exist_ok=True)

    def track_input(self, path):
        h = hashlib.sha256()
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 16), b""):
                h.update(chunk)
        self.inputs[str(path)] = h.hexdigest()

    def emit(self, name, text):
        """Write ``text`` to ``--out/name`` or to stdout."""
        if self.out_dir:
            path = self.out_dir / name
            path.write_text(text, encoding="utf-8")
            self.outputs.append(str(path))
        else:
            self.stdout.write(text)

    def say(self, text):
        print(text, file=sys.stderr if not self.out_dir else sys.stdout)


def _graph(run):
    args = run.args
    if not args.graph:
        raise UsageError("--graph is required")
    run.track_input(args.graph)
    return load_edge_list(args.graph, reverse=args.reverse_edges)


def _log(run):
    if not run.args.log:
        raise UsageError("--log is required")
    run.track_input(run.args.log)
    return load_activity_log(run.args.log)


def _vector(g, spec, run):
    """``uniform`` | ``indegree`` | ``uniform:x`` | ``file:PATH`` (``label<TAB>value``)."""
    if spec in ("uniform", "indegree"):
        return spec
    if spec.startswith("uniform:"):
        return np.full(g.node_count, float(spec.split(":", 1)[1]))
    path = spec[5:] if spec.startswith("file:") else spec
    run.track_input(path)
    vec = np.zeros(g.node_count)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2 or not g.has_label(parts[0]):
                raise GraphFormatError(f"bad vector entry {line!r}", lineno)
            vec[g.index_of(parts[0])] = float(parts[1])
    return vec


def _check_converged(run, result, what):
    if not result.converged:
        msg = (f"{what} did not converge in {result.iterations_used} iterations "
               f"(residual {result.final_residual:.6g})")
        if run.args.strict:
            raise NumericFailure(msg)
        run.say(f"warning: {msg}")


def _centrality(run, metric):
    a = run.args
    g = _graph(run)
    cfg = CentralityConfig(alpha=a.alpha, start=_vector(g, a.start, run), tol=a.tol,
                           max_iterations=a.max_iters,
                           allow_alpha_one=getattr(a, "allow_alpha_one", False))
    try:
        if metric == "pagerank":
            res = pagerank(g, cfg)
        elif metric == "acentrality":
            res = alpha_centrality(g, cfg)
        else:
            res = normalized_alpha_centrality(g, cfg)
    except ConvergenceBoundError as exc:
        raise NumericFailure(str(exc)) from None
    _check_converged(run, res, metric)
    if a.format == "json":
        run.emit(f"{metric}.json", res.to_json(g.labels) + "\n")
    else:
        run.emit(f"{metric}.tsv", res.to_tsv(g.labels))
    return {"iterations": res.iterations_used, "converged": res.converged}


def cmd_pagerank(run):
    return _centrality(run, "pagerank")


def cmd_acentrality(run):
    return _centrality(run, "acentrality")


def cmd_nacentrality(run):
    return _centrality(run, "nacentrality")


def cmd_approx(run):
    a = run.args
    g = _graph(run)
    res = approximate_centrality(g, _vector(g, a.start, run), a.alpha, a.delta,
                                 epsilon=a.epsilon)
    report = {k: res.extra[k] for k in ("epsilon", "residual_l1_final", "bound_applicable")}
    report["iterations"] = res.iterations_used
    if "iteration_bound" in res.extra:
        report["iteration_bound"] = res.extra["iteration_bound"]
    run.emit("approx.tsv", res.to_tsv(g.labels))
    run.emit("approx_report.json", json.dumps(report, indent=2) + "\n")
    return report


def cmd_spectral(run):
    g = _graph(run)
    est = spectral_radius(g, tol=run.args.tol, max_iters=run.args.max_iters)
    tau = est.threshold
    info = {"lambda1": est.lambda1, "tau": tau if math.isfinite(tau) else "inf",
            "iterations": est.iterations, "converged": est.converged, "period": est.period}
    print(f"lambda1 = {est.lambda1:.6g}")
    print(f"tau = {tau:.6g}")
    if not est.converged:
        msg = f"power iteration periodic (period {est.period}); estimate is a Cesaro average"
        if run.args.strict and est.period == 1:
            raise NumericFailure(msg)
        print(f"note: {msg}", file=sys.stderr)
    if run.out_dir:
        run.emit("spectral.json", json.dumps(info, indent=2) + "\n")
    return info


def cmd_threshold(run):
    g = _graph(run)
    tau = spectral_radius(g).threshold
    print(f"tau = {tau:.6g}")
    if run.out_dir:
        run.emit("threshold.json", json.dumps({"tau": tau if math.isfinite(tau) else "inf"}) + "\n")
    return {"tau": tau if math.isfinite(tau) else "inf"}


def cmd_path_series(run):
    a = run.args
    g = _graph(run)
    rep = path_series(g, a.alpha, a.tmax)
    buf = io.StringIO()
    buf.write("k,series_l1,expected_length\n")
    for k, s, length in rep.rows():
        buf.write(f"{k},{float(s)!r},{float(length)!r}\n")
    run.emit("path_series.csv", buf.getvalue())
    return {"diverging": rep.diverging}


def cmd_diffuse(run):
    a = run.args
    g = _graph(run)
    init = _vector(g, a.initial, run)
    if isinstance(init, str):
        init = np.ones(g.node_count) if init == "uniform" else np.array(g.in_degree)
    cfg = DiffusionConfig(alpha=a.alpha, delta_self=a.delta_self, mode=a.mode,
                          dangling=a.dangling)
    runner = run_conservative if cfg.mode.value == "conservative" else run_nonconservative
    traj = runner(g, init, cfg, a.steps)
    buf = io.StringIO()
    traj.to_csv(buf, labels=g.labels, max_nodes=a.per_node_max)
    run.emit("diffusion.csv", buf.getvalue())
    return {"final_l1": float(traj.l1_norms()[-1])}


def cmd_epidemic(run):
    a = run.args
    g = _graph(run)
    p0 = _vector(g, a.p0, run)
    if isinstance(p0, str):
        raise UsageError("--p0 must be uniform:x or a file")
    params = EpidemicParams(mu=a.mu, beta=a.beta, p0=p0, steps=a.steps)
    det = sis_deterministic(g, params)
    mc = sis_montecarlo(g, params, a.trials, a.seed)
    buf = io.StringIO()
    buf.write("step,linear_l1,linear_clamped_l1,exceeds_one,mc_mean_infected\n")
    mean = mc.mean_infected()
    for t in range(a.steps + 1):
        buf.write(f"{t},{float(det.deterministic[t].sum())!r},{float(det.clamped[t].sum())!r},"
                  f"{int(det.exceeds_one[t])},{float(mean[t])!r}\n")
    run.emit("epidemic.csv", buf.getvalue())
    est = spectral_radius(g)
    summary = {"mu": a.mu, "beta": a.beta, "ratio": a.mu / a.beta if a.beta else "inf",
               "tau": est.threshold if math.isfinite(est.threshold) else "inf",
               "trials": a.trials, "mean_final": mc.extra["mean_final"],
               "classification": mc.classification}
    run.emit("epidemic_summary.json", json.dumps(summary, indent=2) + "\n")
    return summary


def cmd_cascades(run):
    g = _graph(run)
    log = _log(run)
    buf = io.StringIO()
    buf.write("story_id,submitter,size,members\n")
    for sid in log.stories:
        c = extract_cascade(g, log, sid)
        buf.write(f"{sid},{c.submitter},{c.size},{' '.join(c.members)}\n")
    run.emit("cascades.csv", buf.getvalue())
    return {"stories": len(log)}


def _estimate_kwargs(a):
    return {"min_stories": a.min_stories, "min_votes": a.min_votes, "first_k": a.first_k}


def cmd_influence(run):
    g = _graph(run)
    log = _log(run)
    ests = influence_estimates(g, log, **_estimate_kwargs(run.args))
    buf = io.StringIO()
    buf.write("user_id,stories_counted,avg_follower_votes,avg_cascade_size\n")
    for e in ests:
        buf.write(f"{e.user_id},{e.stories_counted},{e.avg_follower_votes!r},"
                  f"{e.avg_cascade_size!r}\n")
    run.emit("influence.csv", buf.getvalue())
    return {"eligible_users": len(ests)}


def cmd_sweep(run):
    a = run.args
    g = _graph(run)
    log = _log(run)
    metrics = [m.strip() for m in a.metrics.split(",") if m.strip()]
    for m in metrics:
        if m not in ("pagerank", "nacentrality"):
            raise UsageError(f"unknown metric {m!r}")
    grid = (default_alpha_grid() if a.grid is None
            else [float(x) for x in a.grid.split(",")])
    try:
        sw = correlation_sweep(g, log, grid, metrics=metrics, exclusion=a.exclusion,
                               **_estimate_kwargs(a))
    except ValueError as exc:
        raise ActivityLogError(str(exc)) from None
    buf = io.StringIO()
    sw.to_csv(buf)
    run.emit("sweep.csv", buf.getvalue())
    return {"users": len(sw.users), "lambda1": sw.lambda1, "rows": len(sw.rows)}


def cmd_synth(run):
    a = run.args
    if not run.out_dir:
        raise UsageError("synth needs --out DIR")
    data = synth(a.users, a.cascades, a.seed, mean_follows=a.mean_follows,
                 base_rate=a.base_rate, background_votes=a.background_votes)
    run.emit("graph.tsv", dump_edge_list(data.graph))
    write_metadata(data.graph, run.out_dir / "graph.meta.json")
    run.outputs.append(str(run.out_dir / "graph.meta.json"))
    buf = io.StringIO()
    write_activity_log(data.events, buf)
    run.emit("activity.csv", buf.getvalue())
    run.emit("planted.tsv", "".join(f"{lab}\t{float(w)!r}\n"
                                    for lab, w in zip(data.graph.labels, data.planted)))
    return {"users": a.users, "cascades": a.cascades, "events": len(data.events)}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--graph", metavar="PATH", help="edge list 'src dst [weight]' (default: none)")
    g.add_argument("--out", metavar="DIR", help="output directory (default: stdout)")
    g.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    g.add_argument("--strict", action="store_true",
                   help="treat non-convergence as failure, exit 3 (default: off)")
    g.add_argument("--reverse-edges", action="store_true",
                   help="flip every edge after loading (default: off)")
    g.add_argument("--threads", type=int, default=1,
                   help="worker threads; recorded only, runs are sequential (default: 1)")

    parser = _Parser(prog="diffcent", description=__doc__.split("\n")[0],
                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND", parser_class=_Parser)
    sub.required = True

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_, description=help_,
                           formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        p.set_defaults(func=func)
        return p

    for name, func, default_start in (("pagerank", cmd_pagerank, "uniform"),
                                      ("acentrality", cmd_acentrality, "indegree"),
                                      ("nacentrality", cmd_nacentrality, "indegree")):
        p = add(name, func, f"compute {name} scores")
        p.add_argument("--alpha", type=float, required=True, help="damping / attenuation factor")
        p.add_argument("--start", default=default_start,
                       help="starting vector: uniform | indegree | file:PATH")
        p.add_argument("--tol", type=float, default=1e-9, help="L1 change tolerance")
        p.add_argument("--max-iters", type=int, default=10_000, help="iteration cap")
        p.add_argument("--format", choices=("tsv", "json"), default="tsv", help="output format")
        if name == "pagerank":
            p.add_argument("--allow-alpha-one", action="store_true",
                           help="permit alpha = 1 (random walk without restarts)")

    p = add("approx", cmd_approx, "approximate Alpha-Centrality by residual pushing")
    p.add_argument("--alpha", type=float, required=True, help="attenuation factor")
    p.add_argument("--delta", type=float, required=True, help="accuracy parameter in (0, 1]")
    p.add_argument("--epsilon", type=float, default=None, help="override the queue threshold")
    p.add_argument("--start", default="uniform", help="uniform | indegree | file:PATH")

    p = add("spectral", cmd_spectral, "estimate lambda1 and the epidemic threshold")
    p.add_argument("--tol", type=float, default=1e-10, help="relative tolerance")
    p.add_argument("--max-iters", type=int, default=10_000, help="iteration cap")

    add("threshold", cmd_threshold, "print the epidemic threshold 1/lambda1")

    p = add("path-series", cmd_path_series, "attenuated path counts and expected path length")
    p.add_argument("--alpha", type=float, required=True, help="attenuation factor")
    p.add_argument("--tmax", type=int, required=True, help="maximum path length")

    p = add("diffuse", cmd_diffuse, "run a conservative or non-conservative diffusion")
    p.add_argument("--mode", choices=("conservative", "non-conservative"), required=True,
                   help="diffusion class")
    p.add_argument("--alpha", type=float, required=True, help="redistributed / replicated fraction")
    p.add_argument("--delta-self", type=float, default=0.0, help="self-retention portion")
    p.add_argument("--steps", type=int, required=True, help="number of steps")
    p.add_argument("--initial", default="uniform", help="uniform | indegree | uniform:x | file:PATH")
    p.add_argument("--dangling", choices=("error", "sink", "uniform"), default="sink",
                   help="policy for mass at nodes without out-edges")
    p.add_argument("--per-node-max", type=int, default=50,
                   help="include per-node columns when the graph has at most this many nodes")

    p = add("epidemic", cmd_epidemic, "SIS epidemic: linear recurrence and Monte Carlo")
    p.add_argument("--mu", type=float, required=True, help="per-edge infection probability")
    p.add_argument("--beta", type=float, required=True, help="curing probability")
    p.add_argument("--p0", default="uniform:1", help="initial infection: uniform:x | file:PATH")
    p.add_argument("--steps", type=int, default=100, help="horizon")
    p.add_argument("--trials", type=int, default=500, help="Monte Carlo trials")

    def add_estimate_flags(p):
        p.add_argument("--log", metavar="PATH", help="activity log CSV")
        p.add_argument("--min-stories", type=int, default=2, help="qualifying stories needed")
        p.add_argument("--min-votes", type=int, default=100, help="votes for a story to qualify")
        p.add_argument("--first-k", type=int, default=None,
                       help="count follower votes among the first k votes only")

    p = add("cascades", cmd_cascades, "extract per-story vote cascades")
    p.add_argument("--log", metavar="PATH", help="activity log CSV")

    p = add("influence", cmd_influence, "empirical influence estimates per submitter")
    add_estimate_flags(p)

    p = add("sweep", cmd_sweep, "rank correlation of metrics vs empirical influence over alpha")
    add_estimate_flags(p)
    p.add_argument("--metrics", default="pagerank,nacentrality", help="comma-separated metrics")
    p.add_argument("--grid", default=None, help="comma-separated alphas (default: 0..1 by 0.01 "
                   "plus 0..0.01 by 0.0005)")
    p.add_argument("--exclusion", type=float, default=0.01,
                   help="relative window around 1/lambda1 skipped for nacentrality")

    p = add("synth", cmd_synth, "generate a synthetic follower graph and vote log")
    p.add_argument("--users", type=int, default=200, help="number of users")
    p.add_argument("--cascades", type=int, default=1000, help="number of stories")
    p.add_argument("--mean-follows", type=float, default=6.0, help="mean follow count")
    p.add_argument("--base-rate", type=float, default=0.25, help="vote probability scale")
    p.add_argument("--background-votes", type=int, default=2, help="random votes per story")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    code = EXIT_OK
    info = {}
    error = None
    run = None
    try:
        run = _Run(args)
        info = args.func(run) or {}
    except UsageError as exc:
        code, error = EXIT_USAGE, str(exc)
    except NumericFailure as exc:
        code, error = EXIT_NUMERIC, str(exc)
    except (GraphFormatError, ActivityLogError, FileNotFoundError, KeyError) as exc:
        code, error = EXIT_DATA, str(exc)
    except ValueError as exc:
        code, error = EXIT_DATA, str(exc)
    if error:
        print(f"diffcent {args.command}: error: {error}", file=sys.stderr)
    params = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = {"subcommand": args.command, "parameters": params,
                "inputs": run.inputs if run else {},
                "outputs": run.outputs if run else [],
                "exit_code": code, "result": info,
                "duration_s": time.perf_counter() - start, "version": __version__}
    text = json.dumps(manifest, indent=2, default=str)
    if args.out and os.path.isdir(args.out):
        Path(args.out, "manifest.json").write_text(text + "\n", encoding="utf-8")
    else:
        print(json.dumps(manifest, default=str), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
