"""Command-line front end: sample, count, prob, scaling, verify.

Config values come from flags and/or a key-value text file (flags win);
the seed falls back to the CLIQUESCALE_SEED environment variable.  Data
goes to stdout or -o, diagnostics to stderr.  Every output document starts
with comment headers echoing the tool version, the resolved config, the
seed and the derived mean weight.

Exit codes: 0 success, 2 invalid configuration, 3 scaling verdict fail,
4 scaling verdict inconclusive, 1 failed verification.
"""

from __future__ import annotations

import argparse
import os
import sys
from contextlib import contextmanager
from math import comb

from . import __version__
from .errors import ParameterError
from .slowvary import make_l
from .weights import TailDistribution


class UsageError(Exception):
    pass


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="cliquescale",
        description="Heavy-tailed random graphs: sampling, clique counting, "
                    "exact clique probabilities and growth-law checks.")
    top.add_argument("--version", action="version", version=f"cliquescale {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    def shared(p, need_dist=True):
        p.add_argument("--config", help="key = value config file; flags win")
        if need_dist:
            p.add_argument("--alpha", type=float, help="tail exponent, must be > 2")
            p.add_argument("--l", dest="l_name",
                           help="slowly varying factor: one|const|log|logpow|log-formal")
            p.add_argument("--lp", dest="l_params",
                           help="comma-separated parameters for --l")
            p.add_argument("--mu", type=float,
                           help="override the derived mean weight (experimentation only)")
        p.add_argument("--seed", type=int, help="RNG seed (default: $CLIQUESCALE_SEED or 0)")
        p.add_argument("--threads", type=int, default=1,
                       help="worker cap for per-point parallelism")
        p.add_argument("-o", "--output", help="output path (default stdout)")

    p = sub.add_parser("sample", help="sample one graph and write its edge list")
    shared(p)
    p.add_argument("--n", type=int, help="node count")
    p.add_argument("--method", default="auto", choices=["auto", "naive", "skip"])

    p = sub.add_parser("count", help="count k-cliques in a graph file")
    p.add_argument("graph", help="edge-list file produced by 'sample'")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("-o", "--output")

    p = sub.add_parser("prob", help="clique probability by term decomposition")
    shared(p)
    p.add_argument("--k", type=int, help="clique size")
    p.add_argument("--n", type=int, help="graph size")
    p.add_argument("--mc", action="store_true",
                   help="append a Monte Carlo cross-check")
    p.add_argument("--samples", type=int, help="MC samples (default 1000000)")
    p.add_argument("--rtol", type=float, default=1e-8)

    p = sub.add_parser("scaling", help="growth-exponent study over an n grid")
    shared(p)
    p.add_argument("--k", type=int, help="clique size")
    p.add_argument("--n-grid", dest="n_grid",
                   help="comma-separated, geometric, at least 4 points")
    p.add_argument("--method", default="quadrature",
                   choices=["quadrature", "mc", "graphs"])
    p.add_argument("--samples", type=int, help="MC samples per point")
    p.add_argument("--graphs-per-point", type=int, default=50)
    p.add_argument("--tolerance", type=float, default=0.15,
                   help="slope tolerance for the verdict")

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--only", help="comma-separated criterion numbers (default all)")
    p.add_argument("-o", "--output")
    return top


def _apply_config_file(args: argparse.Namespace) -> None:
    path = getattr(args, "config", None)
    if not path:
        return
    try:
        text = open(path).read()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}")
    mapping = {"alpha": ("alpha", float), "l": ("l_name", str),
               "lp": ("l_params", str), "l_params": ("l_params", str),
               "k": ("k", int), "n": ("n", int),
               "n-grid": ("n_grid", str), "n_grid": ("n_grid", str),
               "samples": ("samples", int), "seed": ("seed", int),
               "method": ("method", str), "threads": ("threads", int),
               "mu": ("mu", float), "output": ("output", str)}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"bad config line: {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in mapping:
            raise UsageError(f"unknown config key {key!r}")
        attr, cast = mapping[key]
        if getattr(args, attr, None) is None:       # flags win over the file
            try:
                setattr(args, attr, cast(val))
            except ValueError:
                raise UsageError(f"bad value for {key!r}: {val!r}")


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("CLIQUESCALE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"CLIQUESCALE_SEED must be an integer, got {env!r}")
    return 0


def _resolve_dist(args) -> TailDistribution:
    if getattr(args, "alpha", None) is None:
        raise UsageError("--alpha is required")
    if not args.alpha > 2.0:
        raise UsageError(
            f"invalid --alpha {args.alpha}: the model requires alpha > 2")
    params = tuple(float(x) for x in (args.l_params or "").split(",") if x)
    try:
        l = make_l(args.l_name or "one", params)
        dist = TailDistribution(args.alpha, l, formal=l.formal_only)
        if getattr(args, "mu", None) is not None:
            dist = dist.with_mean_override(args.mu)
    except ParameterError as exc:
        raise UsageError(str(exc))
    return dist


@contextmanager
def _open_out(args):
    if getattr(args, "output", None):
        fh = open(args.output, "w")
        try:
            yield fh
        finally:
            fh.close()
    else:
        yield sys.stdout


def _header_lines(args, dist=None, seed=None) -> list:
    skip = {"command", "config", "output", "func"}
    bits = []
    for key in sorted(vars(args)):
        if key in skip or getattr(args, key) is None:
            continue
        bits.append(f"{key.replace('_', '-')}={getattr(args, key)}")
    lines = [f"cliquescale {__version__}", "config: " + " ".join(bits)]
    if seed is not None:
        lines.append(f"seed {seed}")
    if dist is not None:
        lines.append(f"mu {float(dist.mu)!r}")
    return lines


def _cmd_sample(args) -> int:
    from .graphs import SamplerConfig, sample_graph
    dist = _resolve_dist(args)
    if args.n is None or args.n < 1:
        raise UsageError("--n must be a positive node count")
    seed = _resolve_seed(args)
    config = SamplerConfig(n=args.n, seed=seed, method=args.method)
    graph = sample_graph(dist, config)
    with _open_out(args) as fh:
        # graph.write emits the seed comment itself, as part of the format
        for line in _header_lines(args, dist, seed=None):
            fh.write(f"# {line}\n")
        graph.write(fh)
    print(f"wrote n={graph.n} m={graph.num_edges}", file=sys.stderr)
    return 0


def _cmd_count(args) -> int:
    from .cliques import count_cliques
    from .graphs import WeightedGraph
    try:
        with open(args.graph) as fh:
            graph = WeightedGraph.read(fh)
    except OSError as exc:
        raise UsageError(f"cannot read graph: {exc}")
    census = count_cliques(graph, args.k)
    with _open_out(args) as fh:
        fh.write(f"{census.count}\n")
    print(f"k={args.k} count={census.count} runtime={census.runtime:.3f}s",
          file=sys.stderr)
    return 0


def _cmd_prob(args) -> int:
    from .evaluate import DecompositionReport, clique_prob_mc, clique_prob_quadrature
    dist = _resolve_dist(args)
    if args.k is None or args.n is None:
        raise UsageError("prob needs --k and --n")
    seed = _resolve_seed(args)
    report = clique_prob_quadrature(dist, args.k, args.n, rtol=args.rtol, seed=seed)
    with _open_out(args) as fh:
        for line in _header_lines(args, dist, seed):
            fh.write(f"# {line}\n")
        if report.resonant_terms:
            fh.write(f"# resonant terms: {', '.join(report.resonant_terms)}\n")
        fh.write(DecompositionReport.csv_header() + "\n")
        fh.write(report.csv_row() + "\n")
        if args.mc:
            est = clique_prob_mc(dist, args.k, args.n, args.samples or 1_000_000, seed)
            z = (abs(report.total - est.mean) / est.stderr
                 if est.stderr > 0 else 0.0)
            fh.write(f"# mc mean={est.mean!r} stderr={est.stderr!r} "
                     f"samples={est.samples} z={z:.3f}\n")
    return 0


def _cmd_scaling(args) -> int:
    from .asymptotics import scaling_study
    dist = _resolve_dist(args)
    if args.k is None or not args.n_grid:
        raise UsageError("scaling needs --k and --n-grid")
    try:
        grid = [int(x) for x in str(args.n_grid).split(",") if x]
    except ValueError:
        raise UsageError(f"bad --n-grid: {args.n_grid!r}")
    seed = _resolve_seed(args)
    kwargs = dict(method=args.method, seed=seed, tolerance=args.tolerance,
                  graphs_per_point=args.graphs_per_point, threads=args.threads)
    if args.samples:
        kwargs["samples"] = args.samples
    try:
        study = scaling_study(dist, args.k, grid, **kwargs)
    except ParameterError as exc:
        raise UsageError(str(exc))
    with _open_out(args) as fh:
        for line in _header_lines(args, dist, seed):
            fh.write(f"# {line}\n")
        fh.write(f"# prediction: regime={study.prediction.regime} "
                 f"exponent={study.prediction.p_exponent!r} "
                 f"sv={study.prediction.sv_factor} sharp={study.prediction.sharp}\n")
        for line in study.csv_lines():
            fh.write(line + "\n")
    print(f"verdict: {study.fit.verdict} (slope {study.fit.slope:+.4f}, "
          f"theory {study.fit.theory_exponent})", file=sys.stderr)
    return {"pass": 0, "fail": 3, "inconclusive": 4}[study.fit.verdict]


def _cmd_verify(args) -> int:
    from .acceptance import ALL_CRITERIA, run_all
    numbers = None
    if args.only:
        try:
            numbers = [int(x) for x in args.only.split(",") if x]
        except ValueError:
            raise UsageError(f"bad --only list: {args.only!r}")
        unknown = set(numbers) - set(ALL_CRITERIA)
        if unknown:
            raise UsageError(f"no such criterion: {sorted(unknown)}")
    results = run_all(numbers)
    with _open_out(args) as fh:
        fh.write(f"# cliquescale {__version__} verification\n")
        for res in results:
            fh.write(res.summary() + "\n")
            for d in res.details:
                fh.write(f"    {d}\n")
        n_pass = sum(r.passed for r in results)
        fh.write(f"# {n_pass}/{len(results)} criteria passed\n")
    return 0 if all(r.passed for r in results) else 1


_DISPATCH = {"sample": _cmd_sample, "count": _cmd_count, "prob": _cmd_prob,
             "scaling": _cmd_scaling, "verify": _cmd_verify}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config_file(args)
        return _DISPATCH[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
