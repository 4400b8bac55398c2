"""Frank-Wolfe solver for seeded subgraph-to-subgraph matching.

Graphs enter as signed adjacency matrices (+1 for an edge, -1 for a
non-edge), under which maximizing ``trace A (I_s (+) X) B (I_s (+) X)^T``
over size-(K-s) partial permutations X is equivalent to minimizing the
number of adjacency disagreements across the chosen cores.  The solver
relaxes the partial-permutation constraint to its convex hull (nonnegative
matrices with row/column sums at most one and total mass K-s), ascends with
Frank-Wolfe steps whose linear subproblems are generalized assignment
problems, and finally projects back to the nearest partial permutation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .glap import PartialPermutation, solve_glap, solve_glap_dense

#: Tolerance used when checking membership in the relaxed polytope.
MEMBERSHIP_TOL = 1e-9


@dataclass(frozen=True)
class SignedAdjacency:
    """Symmetric matrix with off-diagonal entries in {-1, +1}.

    ``diag_value`` is the common diagonal value: -1 (the default input
    convention for the solver) or 0 (the convention used for exhaustive
    matchability checks; the constrained optimum is the same either way).
    """

    order: int
    entries: np.ndarray
    diag_value: int

    def __post_init__(self) -> None:
        a = self.entries
        if a.shape != (self.order, self.order):
            raise ValueError(f"entries shape {a.shape} does not match order {self.order}")
        if self.diag_value not in (-1, 0):
            raise ValueError("diag_value must be -1 or 0")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric")
        if not np.all(np.diag(a) == self.diag_value):
            raise ValueError("diagonal entries must all equal diag_value")
        off = a[~np.eye(self.order, dtype=bool)]
        if off.size and not np.all(np.abs(off) == 1):
            raise ValueError("off-diagonal entries must be -1 or +1")


def build_signed_adjacency(edges, order: int, diag_value: int = -1) -> SignedAdjacency:
    """Signed adjacency matrix of a simple graph given by an edge set.

    Entry (i, j) is +1 when {i, j} is an edge and -1 otherwise (i != j);
    the diagonal is constant ``diag_value``.

    Raises:
        ValueError: on a self-loop.
        IndexError: on an out-of-range vertex.
    """
    entries = np.full((order, order), -1, dtype=np.int8)
    np.fill_diagonal(entries, diag_value)
    for u, v in edges:
        if u == v:
            raise ValueError(f"self-loop at vertex {u}")
        if not (0 <= u < order and 0 <= v < order):
            raise IndexError(f"edge ({u}, {v}) out of range for order {order}")
        entries[u, v] = 1
        entries[v, u] = 1
    return SignedAdjacency(order=order, entries=entries, diag_value=diag_value)


@dataclass(frozen=True)
class SubstochasticMatrix:
    """Point of the relaxed feasible region: nonnegative entries, row and
    column sums at most one, total mass ``mass``.

    Membership is checked to tolerance :data:`MEMBERSHIP_TOL`.
    """

    entries: np.ndarray
    mass: int

    def __post_init__(self) -> None:
        z = self.entries
        if z.ndim != 2:
            raise ValueError("entries must be a matrix")
        if self.mass < 0 or self.mass > min(z.shape):
            raise ValueError(f"mass {self.mass} infeasible for shape {z.shape}")
        tol = MEMBERSHIP_TOL
        if z.size:
            if z.min() < -tol:
                raise ValueError("entries must be nonnegative")
            if z.sum(axis=1).max() > 1 + tol or z.sum(axis=0).max() > 1 + tol:
                raise ValueError("row and column sums must be at most one")
        if abs(z.sum() - self.mass) > tol:
            raise ValueError(f"total mass {z.sum()} differs from {self.mass}")

    @property
    def dims(self) -> tuple[int, int]:
        return self.entries.shape

    @classmethod
    def uniform(cls, c: int, d: int, e: int) -> "SubstochasticMatrix":
        """The constant matrix with all entries e / (c*d)."""
        return cls(entries=np.full((c, d), e / (c * d)), mass=e)


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for :func:`ssgm`.

    ``tol`` is the Frobenius-norm change below which the iteration stops;
    ``None`` means the scale-aware default ``1e-6 * sqrt(K - s)``.
    ``restarts`` > 1 reruns the iteration from perturbed starting points
    (deterministically derived from ``restart_seed``) and keeps the best
    projected solution.
    """

    tol: float | None = None
    max_iters: int = 100
    diag_value: int = -1
    restarts: int = 1
    restart_seed: int = 0
    record_iterates: bool = False

    def __post_init__(self) -> None:
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.diag_value not in (-1, 0):
            raise ValueError("diag_value must be -1 or 0")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")


@dataclass(frozen=True)
class MatchResult:
    """Recovered cores and alignment.

    ``omega`` lists the matched vertices of the first graph in ascending
    order, ``lambda_`` the corresponding vertices of the second graph
    (``lambda_[i] == phi[omega[i]]``).  Seed pairs are always included.
    ``objective_trace`` holds the relaxed objective at every iterate, and
    ``iterate_trace`` the iterates themselves when recording was requested.
    """

    omega: tuple[int, ...]
    lambda_: tuple[int, ...]
    phi: dict[int, int]
    objective: float
    disagreements: int
    iterations: int
    converged: bool
    objective_trace: tuple[float, ...]
    iterate_trace: tuple[np.ndarray, ...] | None = None


def _split(adj: SignedAdjacency, s: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Float views of the four seed/nonseed blocks of an adjacency matrix."""
    a = adj.entries.astype(np.float64)
    return a[:s, :s], a[:s, s:], a[s:, :s], a[s:, s:]


def _check_instance(a: SignedAdjacency, b: SignedAdjacency, x_shape: tuple[int, int], s: int) -> None:
    if s < 0 or s > min(a.order, b.order):
        raise ValueError(f"invalid seed count {s}")
    if x_shape != (a.order - s, b.order - s):
        raise ValueError(
            f"matrix shape {x_shape} does not match orders ({a.order}, {b.order}) with {s} seeds"
        )


def objective(a: SignedAdjacency, b: SignedAdjacency, x, s: int) -> float:
    """Value of ``trace A (I_s (+) X) B (I_s (+) X)^T``.

    Evaluated through the seed/nonseed block partition, so the padded matrix
    ``I_s (+) X`` is never materialized; ``x`` may be any real matrix of
    shape (m-s, n-s), feasible or not.
    """
    x = np.asarray(x, dtype=float)
    _check_instance(a, b, x.shape, s)
    a11, _, a21, a22 = _split(a, s)
    b11, b12, _, b22 = _split(b, s)
    seed_term = float(np.vdot(a11, b11.T)) if s else 0.0
    cross = 2.0 * float(np.vdot(a21 @ b12, x)) if s else 0.0
    quad = float(np.vdot(a22 @ x @ b22, x))
    return seed_term + cross + quad


def gradient_step_matrix(a: SignedAdjacency, b: SignedAdjacency, z, s: int) -> np.ndarray:
    """Half-gradient of the relaxed objective at ``z``.

    Returns ``A21 @ B12 + A22 @ Z @ B22``; the true gradient is twice this,
    but the constant factor does not change the assignment step.
    """
    z = z.entries if isinstance(z, SubstochasticMatrix) else np.asarray(z, dtype=float)
    _check_instance(a, b, z.shape, s)
    _, _, a21, a22 = _split(a, s)
    _, b12, _, b22 = _split(b, s)
    grad = a22 @ z @ b22
    if s:
        grad += a21 @ b12
    return grad


def _lambda_star(a_coef: float, b_coef: float) -> float:
    """Maximizer over [0, 1] of a*l^2 + b*l; ties are broken toward 1."""
    if a_coef < 0:
        return min(1.0, max(0.0, -b_coef / (2.0 * a_coef)))
    return 1.0 if a_coef + b_coef >= 0 else 0.0


def line_search(a: SignedAdjacency, b: SignedAdjacency, z, x_star, s: int) -> float:
    """Exact maximizer of the objective along the segment from z to x_star.

    The objective restricted to ``l * x_star + (1 - l) * z`` is a quadratic
    in ``l``; its coefficients come from traces in the direction
    ``D = x_star - z`` and the maximum over [0, 1] is taken in closed form.
    """
    z = z.entries if isinstance(z, SubstochasticMatrix) else np.asarray(z, dtype=float)
    x_star = x_star.entries if isinstance(x_star, SubstochasticMatrix) else np.asarray(x_star, dtype=float)
    _check_instance(a, b, z.shape, s)
    if x_star.shape != z.shape:
        raise ValueError(f"shape mismatch: {x_star.shape} vs {z.shape}")
    d = x_star - z
    grad = gradient_step_matrix(a, b, z, s)
    _, _, _, a22 = _split(a, s)
    _, _, _, b22 = _split(b, s)
    a_coef = float(np.vdot(a22 @ d @ b22, d))
    b_coef = 2.0 * float(np.vdot(grad, d))
    return _lambda_star(a_coef, b_coef)


def project_to_partial_permutation(z: SubstochasticMatrix) -> PartialPermutation:
    """Nearest partial permutation to ``z`` in Frobenius norm.

    Over binary matchings of fixed mass the squared distance is a constant
    minus ``2 trace(Z^T X)``, so the projection is a generalized assignment
    with profit matrix ``z``.
    """
    if z.mass < 1:
        raise ValueError("projection needs mass at least 1")
    return solve_glap(z.entries, z.mass)


def count_disagreements(g_edges, h_edges, phi: dict[int, int]) -> int:
    """Number of vertex pairs on which a candidate alignment disagrees.

    A pair {v, v'} of matched vertices disagrees when exactly one of
    {v, v'} and {phi(v), phi(v')} is an edge.
    """
    targets = list(phi.values())
    if len(set(targets)) != len(targets):
        raise ValueError("phi must be injective")
    gset = {(min(u, v), max(u, v)) for u, v in g_edges}
    hset = {(min(u, v), max(u, v)) for u, v in h_edges}
    count = 0
    for v, w in itertools.combinations(sorted(phi), 2):
        in_g = (min(v, w), max(v, w)) in gset
        in_h = (min(phi[v], phi[w]), max(phi[v], phi[w])) in hset
        count += in_g != in_h
    return count


def _disagreements_from_matrices(a: SignedAdjacency, b: SignedAdjacency, phi: dict[int, int]) -> int:
    vs = np.fromiter(sorted(phi), dtype=np.intp)
    ws = np.fromiter((phi[v] for v in vs), dtype=np.intp)
    sub = a.entries[np.ix_(vs, vs)].astype(np.int32) * b.entries[np.ix_(ws, ws)].astype(np.int32)
    # Off-diagonal products are -1 exactly on disagreeing ordered pairs.
    return int((sub == -1).sum()) // 2


def _frank_wolfe(
    c0: float,
    a21b12: np.ndarray | None,
    a22: np.ndarray,
    b22: np.ndarray,
    z0: np.ndarray,
    e: int,
    tol: float,
    max_iters: int,
    record: bool,
):
    """Run the ascent loop from ``z0``; returns the final iterate and trace."""

    def value(z: np.ndarray, azb: np.ndarray) -> float:
        f = c0 + float(np.vdot(azb, z))
        if a21b12 is not None:
            f += 2.0 * float(np.vdot(a21b12, z))
        return f

    z = z0
    trace_vals: list[float] = []
    iterates: list[np.ndarray] | None = [z0.copy()] if record else None
    converged = False
    iterations = 0
    for _ in range(max_iters):
        azb = a22 @ z @ b22
        trace_vals.append(value(z, azb))
        grad = azb if a21b12 is None else azb + a21b12
        x_star = solve_glap_dense(grad, e)
        d = x_star - z
        a_coef = float(np.vdot(a22 @ d @ b22, d))
        b_coef = 2.0 * float(np.vdot(grad, d))
        lam = _lambda_star(a_coef, b_coef)
        z = z + lam * d
        iterations += 1
        if record:
            iterates.append(z.copy())
        if lam * float(np.linalg.norm(d)) <= tol:
            converged = True
            break
    trace_vals.append(value(z, a22 @ z @ b22))
    return z, trace_vals, iterates, iterations, converged


def _perturbed_start(z0: np.ndarray, e: int, seed: int, index: int) -> np.ndarray:
    """Midpoint of the uniform start and a random partial permutation."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    c, d = z0.shape
    rows = rng.choice(c, size=e, replace=False)
    cols = rng.choice(d, size=e, replace=False)
    x = np.zeros((c, d))
    x[rows, cols[rng.permutation(e)]] = 1.0
    return 0.5 * z0 + 0.5 * x


def ssgm(
    a: SignedAdjacency,
    b: SignedAdjacency,
    k: int,
    s: int,
    opts: SolverOptions | None = None,
) -> MatchResult:
    """Seeded subgraph-to-subgraph matching by Frank-Wolfe ascent.

    Finds K vertices in each graph and a bijection between them that
    approximately minimizes adjacency disagreements, with the first ``s``
    vertices of each graph fixed as identically aligned seeds (callers
    relabel their graphs so seeds occupy indices 0..s-1).  With
    ``k == min(m, n) == m == n`` this is full seeded graph matching.

    The relaxed iteration starts from the uniform feasible point, solves a
    generalized assignment problem per step, moves by an exact line search,
    and stops when the iterate moves less than ``opts.tol`` in Frobenius
    norm (or at ``opts.max_iters``, reported via ``converged=False``).  The
    final iterate is projected to the nearest partial permutation.
    """
    opts = opts or SolverOptions()
    m, n = a.order, b.order
    if k < 1 or s < 0 or s > k or k > min(m, n):
        raise ValueError(f"need 1 <= K <= min(m, n) and 0 <= s <= K, got K={k}, s={s}, m={m}, n={n}")
    if k > s and (m == s or n == s):
        raise ValueError("no nonseed vertices available to complete the core")

    if k == s:
        phi = {i: i for i in range(s)}
        obj = objective(a, b, np.zeros((m - s, n - s)), s)
        return MatchResult(
            omega=tuple(range(s)),
            lambda_=tuple(range(s)),
            phi=phi,
            objective=obj,
            disagreements=_disagreements_from_matrices(a, b, phi) if s else 0,
            iterations=0,
            converged=True,
            objective_trace=(obj,),
            iterate_trace=() if opts.record_iterates else None,
        )

    e = k - s
    tol = opts.tol if opts.tol is not None else 1e-6 * math.sqrt(e)
    _, _, a21, a22 = _split(a, s)
    b11, b12, _, b22 = _split(b, s)
    a11 = a.entries[:s, :s].astype(np.float64)
    c0 = float(np.vdot(a11, b11.T)) if s else 0.0
    a21b12 = (a21 @ b12) if s else None
    z0 = np.full((m - s, n - s), e / ((m - s) * (n - s)))

    best = None
    best_obj = -np.inf
    for restart in range(opts.restarts):
        start = z0 if restart == 0 else _perturbed_start(z0, e, opts.restart_seed, restart)
        z, trace_vals, iterates, iterations, converged = _frank_wolfe(
            c0, a21b12, a22, b22, start, e, tol, opts.max_iters, opts.record_iterates
        )
        projected = solve_glap(z, e)
        x_dense = projected.to_dense()
        proj_obj = objective(a, b, x_dense, s)
        if proj_obj > best_obj:
            best_obj = proj_obj
            best = (projected, trace_vals, iterates, iterations, converged)

    projected, trace_vals, iterates, iterations, converged = best
    phi = {i: i for i in range(s)}
    for r, c in projected.sorted_pairs():
        phi[s + r] = s + c
    omega = tuple(sorted(phi))
    return MatchResult(
        omega=omega,
        lambda_=tuple(phi[v] for v in omega),
        phi=phi,
        objective=best_obj,
        disagreements=_disagreements_from_matrices(a, b, phi),
        iterations=iterations,
        converged=converged,
        objective_trace=tuple(trace_vals),
        iterate_trace=tuple(iterates) if iterates is not None else None,
    )
