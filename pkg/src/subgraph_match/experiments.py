"""Benchmark harness: synthetic sweeps, real-data core/noncore splits, CSV.

Replications fan out over a process pool; every replication's random stream
is derived from (master seed, cell index, replication index), and results
are reduced in sorted order, so output is byte-identical regardless of the
worker count.  Wall-clock columns are the one intentionally nondeterministic
output; configs can set ``timing = off`` to zero them when byte-stable CSVs
are needed.
"""

from __future__ import annotations

import concurrent.futures
import csv
import io
import logging
import multiprocessing
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph_model import CorrelatedPairSpec, GraphPair, match_ratio, sample_pair
from .matcher import SolverOptions, build_signed_adjacency, ssgm

log = logging.getLogger(__name__)

CSV_HEADER = [
    "m", "n", "K", "p", "rho", "s",
    "algorithm", "reps", "mean_match_ratio", "stderr", "mean_iters", "mean_wall_ms",
]

ALGO_SUBGRAPH = "ssSGM"
ALGO_BASELINE = "SGM"


@dataclass(frozen=True)
class SweepSpec:
    """Grid of synthetic cells: every (p, rho, s) combination is one cell."""

    m: int
    n: int
    k: int
    p_values: tuple[float, ...]
    rho_values: tuple[float, ...]
    s_values: tuple[int, ...]
    replications: int
    master_seed: int = 0
    max_iters: int = 100
    diag_value: int = -1
    workers: int = 1
    timing: bool = True

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not (self.p_values and self.rho_values and self.s_values):
            raise ValueError("p, rho and s lists must be nonempty")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    def cells(self) -> list[tuple[float, float, int]]:
        """Cell keys in deterministic sorted order."""
        return sorted(
            (p, rho, s)
            for p in self.p_values
            for rho in self.rho_values
            for s in self.s_values
        )


@dataclass(frozen=True)
class RealSplitSpec:
    """Core/noncore split protocol over one source graph."""

    edge_list: str
    k: int
    s_values: tuple[int, ...]
    replications: int
    master_seed: int = 0
    max_iters: int = 100
    diag_value: int = -1
    workers: int = 1
    timing: bool = True

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not self.s_values:
            raise ValueError("s list must be nonempty")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass(frozen=True)
class ResultRow:
    """One aggregated (cell, algorithm) line of the output CSV."""

    m: int
    n: int
    k: int
    p: float | None
    rho: float | None
    s: int
    algorithm: str
    reps: int
    mean_match_ratio: float | None
    stderr: float | None
    mean_iters: float | None
    mean_wall_ms: float | None

    def to_csv(self) -> list[str]:
        def num(x, fmt):
            return "" if x is None else format(x, fmt)

        return [
            str(self.m), str(self.n), str(self.k),
            num(self.p, "g"), num(self.rho, "g"), str(self.s),
            self.algorithm, str(self.reps),
            num(self.mean_match_ratio, ".6f"), num(self.stderr, ".6f"),
            num(self.mean_iters, ".3f"), num(self.mean_wall_ms, ".3f"),
        ]


def rows_to_csv_bytes(rows: list[ResultRow]) -> bytes:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf)
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.to_csv())
    return buf.getvalue().encode()


def write_csv(rows: list[ResultRow], path) -> None:
    Path(path).write_bytes(rows_to_csv_bytes(rows))


def _derive_seed(master: int, cell_index: int, rep_index: int) -> int:
    """Per-replication seed, independent of scheduling."""
    ss = np.random.SeedSequence(master, spawn_key=(cell_index, rep_index))
    return int(ss.generate_state(1)[0])


def _timed_ssgm(a, b, k, s, opts, timing):
    start = time.perf_counter() if timing else 0.0
    result = ssgm(a, b, k, s, opts)
    wall_ms = (time.perf_counter() - start) * 1e3 if timing else 0.0
    return result, wall_ms


def _run_pair_replication(pair: GraphPair, k: int, s: int, max_iters: int,
                          diag_value: int, timing: bool):
    """Run the subgraph matcher and the full-graph baseline on one pair."""
    a = build_signed_adjacency(pair.g_edges, pair.g_order, diag_value)
    b = build_signed_adjacency(pair.h_edges, pair.h_order, diag_value)
    opts = SolverOptions(max_iters=max_iters, diag_value=diag_value)
    res_sub, wall_sub = _timed_ssgm(a, b, k, s, opts, timing)
    res_base, wall_base = _timed_ssgm(a, b, min(a.order, b.order), s, opts, timing)
    return (
        match_ratio(res_sub, pair), res_sub.iterations, wall_sub,
        match_ratio(res_base, pair), res_base.iterations, wall_base,
    )


def _sweep_task(args):
    (cell_index, rep_index, m, n, k, s, p, rho, master, max_iters, diag_value, timing) = args
    seed = _derive_seed(master, cell_index, rep_index)
    pair = sample_pair(
        CorrelatedPairSpec(m=m, n=n, k=k, s=s, edge_prob=p, correlation=rho, rng_seed=seed)
    )
    return (cell_index, rep_index) + _run_pair_replication(pair, k, s, max_iters, diag_value, timing)


def _real_task(args):
    (cell_index, rep_index, edges, order, k, s, master, max_iters, diag_value, timing) = args
    seed = _derive_seed(master, cell_index, rep_index)
    pair = split_pair(edges, order, k, s, seed)
    return (cell_index, rep_index) + _run_pair_replication(pair, k, s, max_iters, diag_value, timing)


def _run_tasks(task_fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [task_fn(t) for t in tasks]
    pool = concurrent.futures.ProcessPoolExecutor(
        max_workers=workers, mp_context=multiprocessing.get_context("spawn")
    )
    with pool:
        return list(pool.map(task_fn, tasks, chunksize=max(1, len(tasks) // (8 * workers))))


def _aggregate(cell_meta, outcomes, replications) -> list[ResultRow]:
    """Reduce per-replication outcomes into two rows per feasible cell."""
    rows: list[ResultRow] = []
    by_cell: dict[int, list] = {}
    for rec in outcomes:
        by_cell.setdefault(rec[0], []).append(rec)
    for cell_index, meta in enumerate(cell_meta):
        m, n, k, p, rho, s, feasible, reason = meta
        if not feasible:
            log.warning("cell (p=%s, rho=%s, s=%s) skipped: %s", p, rho, s, reason)
            rows.append(ResultRow(m, n, k, p, rho, s, "skipped", 0, None, None, None, None))
            continue
        recs = sorted(by_cell.get(cell_index, []), key=lambda r: r[1])
        sub = np.array([r[2:5] for r in recs], dtype=float)
        base = np.array([r[5:8] for r in recs], dtype=float)
        for algo, data in ((ALGO_SUBGRAPH, sub), (ALGO_BASELINE, base)):
            ratios, iters, walls = data[:, 0], data[:, 1], data[:, 2]
            stderr = float(ratios.std(ddof=1) / np.sqrt(len(ratios))) if len(ratios) > 1 else 0.0
            rows.append(
                ResultRow(
                    m, n, k, p, rho, s, algo, replications,
                    float(ratios.mean()), stderr, float(iters.mean()), float(walls.mean()),
                )
            )
    return rows


def run_sweep(spec: SweepSpec) -> list[ResultRow]:
    """Execute the synthetic grid and aggregate per-cell statistics.

    Each cell runs the subgraph matcher with the configured core size and
    the full-graph baseline (core size min(m, n)); both are scored by the
    fraction of nonseed core vertices matched to their latent partner.
    Infeasible cells (e.g. s > K) produce a "skipped" row.
    """
    cell_meta = []
    tasks = []
    for cell_index, (p, rho, s) in enumerate(spec.cells()):
        feasible, reason = True, ""
        if s > spec.k:
            feasible, reason = False, f"s={s} exceeds K={spec.k}"
        elif spec.k > min(spec.m, spec.n):
            feasible, reason = False, f"K={spec.k} exceeds min(m, n)"
        cell_meta.append((spec.m, spec.n, spec.k, p, rho, s, feasible, reason))
        if feasible:
            for rep in range(spec.replications):
                tasks.append(
                    (cell_index, rep, spec.m, spec.n, spec.k, s, p, rho,
                     spec.master_seed, spec.max_iters, spec.diag_value, spec.timing)
                )
    outcomes = _run_tasks(_sweep_task, tasks, spec.workers)
    return _aggregate(cell_meta, outcomes, spec.replications)


def split_pair(edges: frozenset[tuple[int, int]], order: int, k: int, s: int, seed: int) -> GraphPair:
    """Carve one core/noncore split out of a source graph.

    Selects K core vertices uniformly, splits the remaining vertices into
    two halves (dropping one uniformly chosen vertex when the remainder is
    odd), induces one graph on core+half each, fixes s uniformly chosen
    seeds as labels 0..s-1, and uniformly relabels all other vertices.
    """
    if not 1 <= k <= order:
        raise ValueError(f"need 1 <= K <= order, got K={k}, order={order}")
    if not 0 <= s <= k:
        raise ValueError(f"need 0 <= s <= K, got s={s}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    everyone = rng.permutation(order)
    core = everyone[:k]
    rest = everyone[k:]
    if rest.size % 2:
        log.warning("odd noncore remainder %d: dropping one vertex", rest.size)
        rest = rest[:-1]
    half = rest.size // 2
    g_vertices = np.concatenate([core, rest[:half]])
    h_vertices = np.concatenate([core, rest[half:]])

    seed_ids = core[:s].tolist()
    seed_set = set(seed_ids)

    def relabeling(vertices: np.ndarray) -> dict[int, int]:
        nonseed = [v for v in vertices.tolist() if v not in seed_set]
        order_map = {int(v): i for i, v in enumerate(seed_ids)}
        shuffled = rng.permutation(len(nonseed))
        for v, pos in zip(nonseed, shuffled.tolist()):
            order_map[int(v)] = s + pos
        return order_map

    g_map = relabeling(g_vertices)
    h_map = relabeling(h_vertices)

    def induce(vertex_map: dict[int, int]) -> frozenset[tuple[int, int]]:
        kept = set(vertex_map)
        out = set()
        for u, v in edges:
            if u in kept and v in kept:
                a, b = vertex_map[u], vertex_map[v]
                out.add((min(a, b), max(a, b)))
        return frozenset(out)

    core_g = tuple(g_map[int(v)] for v in core)
    core_h = tuple(h_map[int(v)] for v in core)
    return GraphPair(
        g_order=k + half,
        h_order=k + half,
        g_edges=induce(g_map),
        h_edges=induce(h_map),
        true_alignment=dict(zip(core_g, core_h)),
        core_g=core_g,
        core_h=core_h,
        seeds=tuple((i, i) for i in range(s)),
    )


def run_real_split(spec: RealSplitSpec) -> list[ResultRow]:
    """Execute the core/noncore split protocol on a real edge list."""
    source = ingest_edge_list(spec.edge_list)
    order = source.order
    cell_meta = []
    tasks = []
    for cell_index, s in enumerate(sorted(spec.s_values)):
        feasible, reason = True, ""
        if spec.k > order:
            feasible, reason = False, f"K={spec.k} exceeds source order {order}"
        elif s > spec.k:
            feasible, reason = False, f"s={s} exceeds K={spec.k}"
        cell_meta.append((0, 0, spec.k, None, None, s, feasible, reason))
        if feasible:
            half = (order - spec.k) // 2
            cell_meta[-1] = (spec.k + half, spec.k + half, spec.k, None, None, s, True, "")
            for rep in range(spec.replications):
                tasks.append(
                    (cell_index, rep, source.edges, order, spec.k, s,
                     spec.master_seed, spec.max_iters, spec.diag_value, spec.timing)
                )
    outcomes = _run_tasks(_real_task, tasks, spec.workers)
    return _aggregate(cell_meta, outcomes, spec.replications)


class EdgeListError(ValueError):
    """Malformed edge-list input; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


@dataclass(frozen=True)
class EdgeList:
    """Parsed simple graph with 0-based contiguous vertex ids.

    ``original_ids[i]`` is the id vertex ``i`` carried in the source file
    (identity when the file was already 0-based contiguous, in which case
    ``compacted`` is False).
    """

    order: int
    edges: frozenset[tuple[int, int]]
    duplicates_dropped: int
    compacted: bool
    original_ids: tuple[int, ...]

    @property
    def density(self) -> float:
        if self.order < 2:
            return 0.0
        return len(self.edges) / (self.order * (self.order - 1) / 2)


def ingest_edge_list(path) -> EdgeList:
    """Parse a whitespace-separated edge list.

    One edge per line as two integer vertex ids; blank lines and ``#``
    comments are ignored; repeated edges are dropped (and counted);
    self-loops are rejected.  Ids are compacted to 0..order-1 when the file
    is not already contiguous, with the original ids kept for reporting.
    """
    raw_edges: set[tuple[int, int]] = set()
    duplicates = 0
    ids: set[int] = set()
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise EdgeListError(f"expected two vertex ids, got {stripped!r}", lineno)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeListError(f"non-integer vertex id in {stripped!r}", lineno) from None
            if u < 0 or v < 0:
                raise EdgeListError(f"negative vertex id in {stripped!r}", lineno)
            if u == v:
                raise EdgeListError(f"self-loop at vertex {u}", lineno)
            edge = (min(u, v), max(u, v))
            if edge in raw_edges:
                duplicates += 1
            else:
                raw_edges.add(edge)
            ids.update(edge)
    if not ids:
        raise EdgeListError("edge list contains no edges")
    sorted_ids = sorted(ids)
    compacted = sorted_ids != list(range(len(sorted_ids)))
    index = {v: i for i, v in enumerate(sorted_ids)}
    edges = frozenset((index[u], index[v]) for u, v in raw_edges)
    return EdgeList(
        order=len(sorted_ids),
        edges=edges,
        duplicates_dropped=duplicates,
        compacted=compacted,
        original_ids=tuple(sorted_ids),
    )


def parse_config(path) -> dict[str, str]:
    """Read a ``key = value`` config file; ``#`` starts a comment."""
    values: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ValueError(f"line {lineno}: expected 'key = value', got {stripped!r}")
            key, _, value = stripped.partition("=")
            values[key.strip()] = value.strip()
    return values


def _parse_list(raw: str, cast):
    return tuple(cast(tok.strip()) for tok in raw.split(",") if tok.strip())


def _common_options(cfg: dict[str, str]) -> dict:
    out = {}
    if "replications" in cfg:
        out["replications"] = int(cfg["replications"])
    if "master_seed" in cfg:
        out["master_seed"] = int(cfg["master_seed"])
    if "max_iters" in cfg:
        out["max_iters"] = int(cfg["max_iters"])
    if "diag" in cfg:
        out["diag_value"] = int(cfg["diag"])
    if "workers" in cfg:
        out["workers"] = int(cfg["workers"])
    if "timing" in cfg:
        raw = cfg["timing"].lower()
        if raw not in ("on", "off"):
            raise ValueError(f"timing must be 'on' or 'off', got {raw!r}")
        out["timing"] = raw == "on"
    return out


_SWEEP_KEYS = {"m", "n", "K", "p", "rho", "s", "replications", "master_seed",
               "max_iters", "diag", "workers", "timing"}
_REAL_KEYS = {"edge_list", "K", "s", "replications", "master_seed",
              "max_iters", "diag", "workers", "timing"}


def load_sweep_spec(path) -> SweepSpec:
    """Build a :class:`SweepSpec` from a config file.

    Keys: ``n`` (required), ``m`` (defaults to n), ``K``, comma lists
    ``p``, ``rho``, ``s``, plus ``replications``, ``master_seed``,
    ``max_iters``, ``diag``, ``workers``, ``timing``.
    """
    cfg = parse_config(path)
    unknown = set(cfg) - _SWEEP_KEYS
    if unknown:
        raise ValueError(f"unknown sweep config keys: {sorted(unknown)}")
    for key in ("n", "K", "p", "rho", "s", "replications"):
        if key not in cfg:
            raise ValueError(f"sweep config missing required key {key!r}")
    n = int(cfg["n"])
    return SweepSpec(
        m=int(cfg.get("m", n)),
        n=n,
        k=int(cfg["K"]),
        p_values=_parse_list(cfg["p"], float),
        rho_values=_parse_list(cfg["rho"], float),
        s_values=_parse_list(cfg["s"], int),
        **_common_options(cfg),
    )


def load_real_spec(path) -> RealSplitSpec:
    """Build a :class:`RealSplitSpec` from a config file.

    Keys: ``edge_list`` (resolved relative to the config file), ``K``,
    comma list ``s``, plus the common options of :func:`load_sweep_spec`.
    """
    cfg = parse_config(path)
    unknown = set(cfg) - _REAL_KEYS
    if unknown:
        raise ValueError(f"unknown real-split config keys: {sorted(unknown)}")
    for key in ("edge_list", "K", "s", "replications"):
        if key not in cfg:
            raise ValueError(f"real-split config missing required key {key!r}")
    edge_path = Path(cfg["edge_list"])
    if not edge_path.is_absolute():
        edge_path = Path(path).parent / edge_path
    return RealSplitSpec(
        edge_list=str(edge_path),
        k=int(cfg["K"]),
        s_values=_parse_list(cfg["s"], int),
        **_common_options(cfg),
    )
