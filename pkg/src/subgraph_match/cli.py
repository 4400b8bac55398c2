"""Command-line interface.

Subcommands: ``match`` (align two edge lists), ``simulate`` (dump one
sampled graph pair), ``bench`` (synthetic sweep to CSV), ``real``
(core/noncore split protocol to CSV), ``oracle`` (exhaustive exact solves
and matchability verification on tiny instances).

Exit codes: 0 success, 1 bad command line, 2 bad data or config,
3 enumeration budget refusal.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .experiments import (
    EdgeListError,
    ingest_edge_list,
    load_real_spec,
    load_sweep_spec,
    run_real_split,
    run_sweep,
    write_csv,
)
from .graph_model import CorrelatedPairSpec, sample_pair
from .matcher import SolverOptions, build_signed_adjacency, ssgm
from .oracle import (
    DEFAULT_BUDGET,
    EnumerationBudgetError,
    brute_force_match,
    brute_force_pq,
    verify_matchability,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_BUDGET = 3


class _Parser(argparse.ArgumentParser):
    """argparse parser that reports usage problems with exit code 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="subgraph-match", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_match = sub.add_parser("match", help="align two edge-list graphs")
    p_match.add_argument("g_path", help="edge list of the first graph")
    p_match.add_argument("h_path", help="edge list of the second graph")
    p_match.add_argument("--core-size", "-K", type=int, required=True)
    p_match.add_argument("--seeds", help="file of known 'g_vertex h_vertex' pairs")
    p_match.add_argument("--diag", type=int, default=-1, choices=(-1, 0))
    p_match.add_argument("--max-iters", type=int, default=100)
    p_match.add_argument("--output", "-o", help="write alignment here instead of stdout")

    p_sim = sub.add_parser("simulate", help="sample one correlated graph pair")
    p_sim.add_argument("--m", type=int)
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--core-size", "-K", type=int, required=True)
    p_sim.add_argument("--num-seeds", "-s", type=int, default=0)
    p_sim.add_argument("--p", type=float, required=True)
    p_sim.add_argument("--rho", type=float, required=True)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--output", "-o", help="write the dump here instead of stdout")

    p_bench = sub.add_parser("bench", help="run a synthetic sweep config")
    p_bench.add_argument("--config", "-c", required=True)
    p_bench.add_argument("--output", "-o", required=True, help="output CSV path")

    p_real = sub.add_parser("real", help="run a core/noncore split config")
    p_real.add_argument("--config", "-c", required=True)
    p_real.add_argument("--output", "-o", required=True, help="output CSV path")

    p_oracle = sub.add_parser("oracle", help="exhaustive exact solves (tiny instances)")
    oracle_sub = p_oracle.add_subparsers(dest="oracle_command", required=True, parser_class=_Parser)

    p_solve = oracle_sub.add_parser("solve", help="exact optimum for two edge lists")
    p_solve.add_argument("g_path")
    p_solve.add_argument("h_path")
    p_solve.add_argument("--core-size", "-K", type=int, required=True)
    p_solve.add_argument("--diag", type=int, default=0, choices=(-1, 0))
    p_solve.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p_solve.add_argument("--pq", action="store_true", help="also search ordered pairs")

    p_verify = oracle_sub.add_parser("verify", help="empirical core-recovery frequency")
    p_verify.add_argument("--m", type=int)
    p_verify.add_argument("--n", type=int, required=True)
    p_verify.add_argument("--core-size", "-K", type=int, required=True)
    p_verify.add_argument("--p", type=float, required=True)
    p_verify.add_argument("--rho", type=float, required=True)
    p_verify.add_argument("--trials", type=int, default=100)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p_verify.add_argument("--pq", action="store_true", help="also check the ordered-pair optimum")

    return parser


def _read_seed_pairs(path) -> list[tuple[int, int]]:
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise EdgeListError(f"expected 'g_vertex h_vertex', got {stripped!r}", lineno)
            try:
                pairs.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise EdgeListError(f"non-integer vertex id in {stripped!r}", lineno) from None
    return pairs


def _relabel_with_seeds(graph, seed_vertices: list[int]) -> tuple[dict[int, int], list[int]]:
    """Internal labeling putting the seed vertices first, in seed order."""
    seen = set()
    for v in seed_vertices:
        if v in seen:
            raise ValueError(f"seed vertex {v} listed twice")
        seen.add(v)
        if not 0 <= v < graph.order:
            raise ValueError(f"seed vertex {v} out of range for order {graph.order}")
    ordering = list(seed_vertices) + [v for v in range(graph.order) if v not in seen]
    to_internal = {v: i for i, v in enumerate(ordering)}
    return to_internal, ordering


def _cmd_match(args) -> int:
    g = ingest_edge_list(args.g_path)
    h = ingest_edge_list(args.h_path)
    seed_pairs = _read_seed_pairs(args.seeds) if args.seeds else []

    # Seed files refer to the ids used in the input files; translate through
    # the compaction map before relabeling seeds to the front.
    def compact(graph, raw, which):
        lookup = {orig: i for i, orig in enumerate(graph.original_ids)}
        if raw not in lookup:
            raise ValueError(f"seed vertex {raw} does not appear in the {which} graph")
        return lookup[raw]

    g_seeds = [compact(g, u, "first") for u, _ in seed_pairs]
    h_seeds = [compact(h, v, "second") for _, v in seed_pairs]
    g_map, g_order = _relabel_with_seeds(g, g_seeds)
    h_map, h_order = _relabel_with_seeds(h, h_seeds)
    g_edges = {(g_map[u], g_map[v]) for u, v in g.edges}
    h_edges = {(h_map[u], h_map[v]) for u, v in h.edges}

    a = build_signed_adjacency(g_edges, g.order, args.diag)
    b = build_signed_adjacency(h_edges, h.order, args.diag)
    result = ssgm(a, b, args.core_size, len(seed_pairs),
                  SolverOptions(max_iters=args.max_iters, diag_value=args.diag))

    lines = [
        f"# objective {result.objective:g}",
        f"# disagreements {result.disagreements}",
        f"# iterations {result.iterations} converged {str(result.converged).lower()}",
        f"# g density {g.density:.6f} ({len(g.edges)} edges, order {g.order})",
        f"# h density {h.density:.6f} ({len(h.edges)} edges, order {h.order})",
    ]
    for v in result.omega:
        w = result.phi[v]
        lines.append(f"{g.original_ids[g_order[v]]} {h.original_ids[h_order[w]]}")
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    spec = CorrelatedPairSpec(
        m=args.m if args.m is not None else args.n,
        n=args.n,
        k=args.core_size,
        s=args.num_seeds,
        edge_prob=args.p,
        correlation=args.rho,
        rng_seed=args.seed,
    )
    pair = sample_pair(spec)
    lines = [
        f"# correlated pair dump: m={spec.m} n={spec.n} K={spec.k} s={spec.s} "
        f"p={spec.edge_prob:g} rho={spec.correlation:g} rng_seed={spec.rng_seed}",
    ]
    lines += [f"g {u} {v}" for u, v in sorted(pair.g_edges)]
    lines += [f"h {u} {v}" for u, v in sorted(pair.h_edges)]
    lines += [f"align {u} {v}" for u, v in zip(pair.core_g, pair.core_h)]
    lines += [f"seed {u} {v}" for u, v in pair.seeds]
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _cmd_bench(args) -> int:
    rows = run_sweep(load_sweep_spec(args.config))
    write_csv(rows, args.output)
    return EXIT_OK


def _cmd_real(args) -> int:
    rows = run_real_split(load_real_spec(args.config))
    write_csv(rows, args.output)
    return EXIT_OK


def _format_optimum(x) -> str:
    return " ".join(f"{i}:{j}" for i, j in x.sorted_pairs())


def _cmd_oracle_solve(args) -> int:
    g = ingest_edge_list(args.g_path)
    h = ingest_edge_list(args.h_path)
    a = build_signed_adjacency(g.edges, g.order, args.diag)
    b = build_signed_adjacency(h.edges, h.order, args.diag)
    value, optima = brute_force_match(a, b, args.core_size, args.budget)
    print(f"value {value:g}")
    for x in sorted(optima, key=lambda x: x.sorted_pairs()):
        print(f"optimum {_format_optimum(x)}")
    if args.pq:
        pq_value, pq_optima = brute_force_pq(a, b, args.core_size, args.budget)
        print(f"pq_value {pq_value:g}")
        for p, q in sorted(pq_optima, key=lambda t: (t[0].sorted_pairs(), t[1].sorted_pairs())):
            print(f"pq_optimum {_format_optimum(p)} | {_format_optimum(q)}")
    return EXIT_OK


def _cmd_oracle_verify(args) -> int:
    spec = CorrelatedPairSpec(
        m=args.m if args.m is not None else args.n,
        n=args.n,
        k=args.core_size,
        s=0,
        edge_prob=args.p,
        correlation=args.rho,
        rng_seed=args.seed,
    )
    report = verify_matchability(spec, args.trials, check_pq=args.pq, budget=args.budget)
    print(f"trials {report.trials}")
    print(f"recovery_frequency {report.frequency:.6f}")
    print(f"unique_recovery_frequency {report.unique_frequency:.6f}")
    if report.pq_frequency is not None:
        print(f"pq_recovery_frequency {report.pq_frequency:.6f}")
        print(f"pq_unique_recovery_frequency {report.pq_unique_frequency:.6f}")
    return EXIT_OK


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with its own codes; normalize to the documented ones.
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        if args.command == "match":
            return _cmd_match(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "real":
            return _cmd_real(args)
        if args.command == "oracle":
            if args.oracle_command == "solve":
                return _cmd_oracle_solve(args)
            return _cmd_oracle_verify(args)
        raise AssertionError(f"unhandled command {args.command}")
    except EnumerationBudgetError as exc:
        print(f"subgraph-match: budget refusal: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (EdgeListError, ValueError, OSError) as exc:
        print(f"subgraph-match: error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
