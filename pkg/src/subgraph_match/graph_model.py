"""Correlated Bernoulli random graph pairs with a latent core alignment.

Two graphs share a core of K vertex pairs.  Each core pair's two edge
indicators are Bernoulli(p_ij) with Pearson correlation rho_ij; every other
adjacency is an independent Bernoulli(p_ij).  With scalar parameters this is
the correlated Erdos-Renyi model.  After sampling, the nonseed vertices of
each graph are uniformly relabeled so an algorithm cannot read the alignment
off the labels; the true alignment is recorded alongside the edges.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .matcher import MatchResult


@dataclass(frozen=True)
class CorrelatedPairSpec:
    """Parameters of one correlated graph-pair distribution.

    ``edge_prob`` is a scalar or a symmetric max(m, n)-square table (entry
    (i, j) drives pair {i, j} in both graphs); ``correlation`` is a scalar
    or a symmetric K-square table over core pairs.  ``rng_seed`` fixes the
    sample: equal specs produce identical pairs.
    """

    m: int
    n: int
    k: int
    s: int
    edge_prob: float | np.ndarray
    correlation: float | np.ndarray
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1:
            raise ValueError("graph orders must be positive")
        if not 1 <= self.k <= min(self.m, self.n):
            raise ValueError(f"need 1 <= K <= min(m, n), got K={self.k}")
        if not 0 <= self.s <= self.k:
            raise ValueError(f"need 0 <= s <= K, got s={self.s}")
        _validate_table(self.edge_prob, max(self.m, self.n), "edge_prob")
        _validate_table(self.correlation, self.k, "correlation")

    def prob_table(self) -> np.ndarray:
        return _as_table(self.edge_prob, max(self.m, self.n))

    def corr_table(self) -> np.ndarray:
        return _as_table(self.correlation, self.k)


def _validate_table(value, size: int, name: str) -> None:
    if np.isscalar(value):
        if not 0.0 <= float(value) <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {value}")
        return
    arr = np.asarray(value, dtype=float)
    if arr.shape != (size, size):
        raise ValueError(f"{name} table must have shape ({size}, {size}), got {arr.shape}")
    if not np.array_equal(arr, arr.T):
        raise ValueError(f"{name} table must be symmetric")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError(f"{name} table entries must lie in [0, 1]")


def _as_table(value, size: int) -> np.ndarray:
    if np.isscalar(value):
        return np.full((size, size), float(value))
    return np.asarray(value, dtype=float)


@dataclass(frozen=True)
class GraphPair:
    """One sampled pair, post-relabeling.

    ``true_alignment`` maps each core vertex label of G to its latent
    counterpart in H; ``core_g[i]`` and ``core_h[i]`` are the labels the
    i-th latent core vertex received in G and H.  Seeds keep labels 0..s-1
    in both graphs and are fixed points of the alignment.
    """

    g_order: int
    h_order: int
    g_edges: frozenset[tuple[int, int]]
    h_edges: frozenset[tuple[int, int]]
    true_alignment: dict[int, int]
    core_g: tuple[int, ...]
    core_h: tuple[int, ...]
    seeds: tuple[tuple[int, int], ...]

    @property
    def k(self) -> int:
        return len(self.core_g)

    @property
    def s(self) -> int:
        return len(self.seeds)


@dataclass(frozen=True)
class MatchabilityDiagnostics:
    """Numbers controlling whether exact matching provably recovers the core.

    ``prob_margin`` is the least distance of any edge probability from {0, 1}
    (the paper-side q); ``correlation_margin`` is the least excess of a core
    correlation over ``(1 - 2*prob_margin)**2``.  The recovery condition is
    a strictly positive correlation margin.
    """

    prob_margin: float
    correlation_margin: float
    condition_met: bool


def _pair_indices(size: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(size, k=1)


def sample_pair(spec: CorrelatedPairSpec) -> GraphPair:
    """Draw one graph pair from the model.

    Each core pair's two indicators come from three independent Bernoulli
    draws: Y ~ Bern(p) gives the first graph's edge, and the second graph
    copies a "heads" draw Bern(rho + (1-rho)p) when Y=1 or a "tails" draw
    Bern((1-rho)p) when Y=0, which realizes the target joint table.  The
    random stream is consumed in a fixed order (core triples Y, then heads,
    then tails, each over pairs in row-major order; noncore pairs of G; of
    H; then the two relabeling permutations), so a seed pins the sample.
    """
    m, n, k, s = spec.m, spec.n, spec.k, spec.s
    rng = np.random.default_rng(np.random.SeedSequence(spec.rng_seed))
    prob = spec.prob_table()
    corr = spec.corr_table()

    ci, cj = _pair_indices(k)
    p_core = prob[ci, cj]
    r_core = corr[ci, cj]
    y = rng.random(ci.size) < p_core
    heads = rng.random(ci.size) < r_core + (1.0 - r_core) * p_core
    tails = rng.random(ci.size) < (1.0 - r_core) * p_core
    g_core = y
    h_core = np.where(y, heads, tails)

    gi, gj = _pair_indices(m)
    g_noncore_mask = ~((gi < k) & (gj < k))
    gni, gnj = gi[g_noncore_mask], gj[g_noncore_mask]
    g_non = rng.random(gni.size) < prob[gni, gnj]

    hi, hj = _pair_indices(n)
    h_noncore_mask = ~((hi < k) & (hj < k))
    hni, hnj = hi[h_noncore_mask], hj[h_noncore_mask]
    h_non = rng.random(hni.size) < prob[hni, hnj]

    sigma_g = np.concatenate([np.arange(s), s + rng.permutation(m - s)])
    sigma_h = np.concatenate([np.arange(s), s + rng.permutation(n - s)])

    def relabel(sigma, ei, ej, keep):
        u = sigma[ei[keep]]
        v = sigma[ej[keep]]
        lo, hi_ = np.minimum(u, v), np.maximum(u, v)
        return zip(lo.tolist(), hi_.tolist())

    g_edges = frozenset(relabel(sigma_g, ci, cj, g_core)) | frozenset(
        relabel(sigma_g, gni, gnj, g_non)
    )
    h_edges = frozenset(relabel(sigma_h, ci, cj, h_core)) | frozenset(
        relabel(sigma_h, hni, hnj, h_non)
    )

    core_g = tuple(int(sigma_g[i]) for i in range(k))
    core_h = tuple(int(sigma_h[i]) for i in range(k))
    return GraphPair(
        g_order=m,
        h_order=n,
        g_edges=frozenset(g_edges),
        h_edges=frozenset(h_edges),
        true_alignment=dict(zip(core_g, core_h)),
        core_g=core_g,
        core_h=core_h,
        seeds=tuple((i, i) for i in range(s)),
    )


def diagnostics(spec: CorrelatedPairSpec) -> MatchabilityDiagnostics:
    """Compute the recovery-condition margins for a model spec.

    ``prob_margin`` can sit on the closed boundary (0 or 1/2); the boundary
    is reported as-is rather than rejected, with the condition evaluated at
    the boundary value.
    """
    prob = spec.prob_table()
    pi, pj = _pair_indices(max(spec.m, spec.n))
    p = prob[pi, pj]
    q = float(np.minimum(p, 1.0 - p).min()) if p.size else 0.0
    corr = spec.corr_table()
    ci, cj = _pair_indices(spec.k)
    if ci.size == 0:
        eps = 1.0 - (1.0 - 2.0 * q) ** 2
    else:
        eps = float((corr[ci, cj] - (1.0 - 2.0 * q) ** 2).min())
    return MatchabilityDiagnostics(prob_margin=q, correlation_margin=eps, condition_met=eps > 0)


def match_ratio(result: MatchResult | Mapping[int, int], pair: GraphPair) -> float:
    """Fraction of nonseed core vertices of G matched to their true partner.

    Core vertices missing from the recovered alignment count as mismatches.
    With no nonseed core vertices (K == s) the ratio is vacuously 1.
    """
    phi = result.phi if isinstance(result, MatchResult) else dict(result)
    nonseed = [v for i, v in enumerate(pair.core_g) if i >= pair.s]
    if not nonseed:
        return 1.0
    hits = sum(1 for v in nonseed if phi.get(v) == pair.true_alignment[v])
    return hits / len(nonseed)
