"""Finite-dimensional von Neumann algebra solvers.

Commutants, bicommutant dimensions, permutation-invariant (fixed-point)
algebras, and the span-growth verification used to certify that
one-sided multiplication operators generate the full invariant algebra.

Two independent routes compute generated-algebra dimensions: a spectral
block-structure decomposition (eigenspace clustering of a generic
element, then coupling analysis) and a breadth-first span closure under
products.  Both must agree or the caller gets :class:`NumericError`;
nothing here trusts a single numerical method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, permutations
from typing import Callable, Sequence

import numpy as np

from .duality_core import haar_unitary, t_plus
from .legops import (
    DENSE_CAP,
    CapExceededError,
    DenseOperator,
    ModelSpace,
    NumericError,
    StructuredOperator,
    left_mult,
    right_mult,
)

RANK_TOL = 1e-8
COMMUTANT_DIM_CAP = 64

__all__ = [
    "RANK_TOL",
    "COMMUTANT_DIM_CAP",
    "AlgebraBasis",
    "GapReport",
    "SpanGrowthReport",
    "hs_inner",
    "orthonormalize",
    "commutant_basis",
    "block_structure",
    "span_closure",
    "generated_algebra_dim",
    "fixed_point_basis",
    "fixed_point_dimension",
    "relative_gap",
    "span_growth_check",
]


def hs_inner(x: np.ndarray, y: np.ndarray) -> complex:
    """Normalized trace inner product <x, y> = Tr(y* x) / d."""
    d = x.shape[0]
    return complex(np.trace(y.conj().T @ x) / d)


def _as_matrix(op) -> np.ndarray:
    if isinstance(op, DenseOperator):
        return op.matrix
    if isinstance(op, StructuredOperator):
        return op.to_dense().matrix
    arr = np.asarray(op, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def _gather(generators) -> tuple[list[np.ndarray], int]:
    mats = [_as_matrix(g) for g in generators]
    if not mats:
        raise ValueError("need at least one generator (or pass the identity)")
    d = mats[0].shape[0]
    if any(m.shape != (d, d) for m in mats):
        raise ValueError("generators must share one dimension")
    if d > DENSE_CAP:
        raise CapExceededError(f"acting dimension {d} exceeds cap {DENSE_CAP}")
    return mats, d


def orthonormalize(mats: Sequence[np.ndarray], rel_tol: float = RANK_TOL) -> list[np.ndarray]:
    """Orthonormal spanning set in the normalized trace inner product.

    Stacks the flattened inputs, takes an SVD, and keeps right singular
    vectors above ``rel_tol`` times the largest singular value.  Output
    matrices satisfy <b_i, b_j> = delta_ij under :func:`hs_inner`.
    """
    if not len(mats):
        return []
    d = mats[0].shape[0]
    stack = np.array([m.reshape(-1) for m in mats])
    _, sv, vh = np.linalg.svd(stack, full_matrices=False)
    keep = sv > rel_tol * sv[0] if sv.size else np.zeros(0, dtype=bool)
    # rows of vh are Frobenius-orthonormal; sqrt(d) rescales to the
    # normalized trace inner product
    return [vh[i].reshape(d, d) * math.sqrt(d) for i in range(int(keep.sum()))]


@dataclass(eq=False)
class AlgebraBasis:
    """Orthonormal basis of a subspace of M_d, usually a *-algebra.

    ``space`` is the model space when the matrices act there; solvers
    also run on plain matrix spaces (tensor powers of C^N for the
    classical Schur-Weyl check), in which case it is None.  For large
    fixed-point algebras only the dimension is materialized and
    ``elements`` may be empty; ``dimension`` is then authoritative.
    """

    space: ModelSpace | None
    elements: tuple[np.ndarray, ...]
    is_algebra: bool
    dimension: int = field(default=-1)

    def __post_init__(self) -> None:
        self.elements = tuple(self.elements)
        if self.dimension < 0:
            self.dimension = len(self.elements)

    @property
    def dim(self) -> int:
        return self.dimension

    def gram_defect(self) -> float:
        """Max deviation of the Gram matrix from the identity."""
        n = len(self.elements)
        if n == 0:
            return 0.0
        g = np.array(
            [[hs_inner(x, y) for y in self.elements] for x in self.elements]
        )
        return float(np.abs(g - np.eye(n)).max())

    def contains(self, x: np.ndarray, tol: float = 1e-8) -> bool:
        """True when x lies in the span of the basis elements."""
        if not self.elements:
            return False
        resid = np.asarray(x, dtype=np.complex128)
        for b in self.elements:
            resid = resid - hs_inner(resid, b) * b
        scale = max(1.0, float(np.abs(x).max()))
        return bool(np.abs(resid).max() <= tol * scale)


def commutant_basis(generators: Sequence) -> AlgebraBasis:
    """Orthonormal basis of the commutant of a generator set.

    Solves the stacked linear system X g = g X, X g* = g* X for all
    generators g by a null-space SVD on d^2 unknowns.  Including the
    adjoint constraints makes the result a *-algebra.  This is the
    literal solver; it is capped at d <= COMMUTANT_DIM_CAP because the
    stacked system has d^2 columns.
    """
    mats, d = _gather(generators)
    if d > COMMUTANT_DIM_CAP:
        raise CapExceededError(
            f"commutant solve needs d <= {COMMUTANT_DIM_CAP}, got {d}"
        )
    eye = np.eye(d)
    rows = []
    for g in mats:
        for h in (g, g.conj().T):
            rows.append(np.kron(eye, h) - np.kron(h.T, eye))
    stacked = np.vstack(rows)
    _, sv, vh = np.linalg.svd(stacked, full_matrices=True)
    # floor the cutoff at the generator scale: a constraint matrix that
    # is numerically zero (generators commuting with everything) must
    # yield the full null space, not a noise-rank one
    gscale = max(float(np.abs(m).max()) for m in mats)
    cut = RANK_TOL * max(float(sv[0]) if sv.size else 0.0, gscale)
    rank = int((sv > cut).sum())
    null = vh[rank:].conj()
    elements = [null[i].reshape(d, d) * math.sqrt(d) for i in range(null.shape[0])]
    space = getattr(generators[0], "space", None)
    return AlgebraBasis(space, tuple(elements), is_algebra=True)


def _sample_words(mats: list[np.ndarray], rng: np.random.Generator, count: int) -> list[np.ndarray]:
    words = []
    for _ in range(count):
        length = int(rng.integers(2, 4))
        idx = rng.integers(0, len(mats), size=length)
        w = mats[idx[0]]
        for i in idx[1:]:
            w = w @ mats[i]
        words.append(w)
    return words


def block_structure(
    generators: Sequence,
    rng: np.random.Generator | None = None,
    retries: int = 3,
) -> tuple[list[tuple[int, int]], int, int]:
    """Wedderburn block data of the unital *-algebra generated by a set.

    Returns (blocks, dim_algebra, dim_commutant) where blocks is a list
    of (k_i, m_i): k_i distinct generic eigenvalue clusters of size m_i
    each, so the algebra is isomorphic to a direct sum of M_{k_i} with
    multiplicity m_i, dim_algebra = sum k_i^2 and dim_commutant =
    sum m_i^2.

    Method: spectral decomposition of a generic Hermitian element of
    the algebra; eigenvalue clusters are the isotypic slices, and two
    clusters sit in the same block exactly when some generator word
    couples their eigenspaces.  A malformed clustering (unequal sizes
    inside one component) triggers a retry with a fresh generic
    element; persistent failure raises :class:`NumericError`.
    """
    mats, d = _gather(generators)
    rng = np.random.default_rng(0xA15EB) if rng is None else rng
    hermm = [g for g in mats]
    hermm += [g.conj().T for g in mats]
    couplers = hermm + _sample_words(hermm, rng, min(8, 2 * len(mats)))

    for _ in range(retries):
        h = np.zeros((d, d), dtype=np.complex128)
        for g in mats + _sample_words(mats, rng, 4):
            c = rng.standard_normal() + 1j * rng.standard_normal()
            h += c * g + np.conj(c) * g.conj().T
        h = (h + h.conj().T) / 2
        vals, vecs = np.linalg.eigh(h)
        span = max(float(vals[-1] - vals[0]), 1.0)
        clusters: list[list[int]] = [[0]]
        for i in range(1, d):
            if vals[i] - vals[i - 1] > 1e-8 * span:
                clusters.append([])
            clusters[-1].append(i)
        nclust = len(clusters)
        # adjacency between eigenvalue clusters through generator words
        adj = np.zeros((nclust, nclust), dtype=bool)
        for g in couplers:
            gv = vecs.conj().T @ g @ vecs
            scale = max(float(np.abs(gv).max()), 1.0)
            for u in range(nclust):
                for v in range(nclust):
                    if u == v or adj[u, v]:
                        continue
                    blk = gv[np.ix_(clusters[u], clusters[v])]
                    if np.abs(blk).max() > 1e-8 * scale:
                        adj[u, v] = adj[v, u] = True
        # connected components
        comp = [-1] * nclust
        ncomp = 0
        for s in range(nclust):
            if comp[s] >= 0:
                continue
            stack = [s]
            comp[s] = ncomp
            while stack:
                u = stack.pop()
                for v in range(nclust):
                    if adj[u, v] and comp[v] < 0:
                        comp[v] = ncomp
                        stack.append(v)
            ncomp += 1
        blocks = []
        ok = True
        for c in range(ncomp):
            sizes = {len(clusters[i]) for i in range(nclust) if comp[i] == c}
            count = sum(1 for i in range(nclust) if comp[i] == c)
            if len(sizes) != 1:
                ok = False
                break
            blocks.append((count, sizes.pop()))
        if ok:
            dim_alg = sum(k * k for k, _ in blocks)
            dim_comm = sum(m * m for _, m in blocks)
            return blocks, dim_alg, dim_comm
    raise NumericError("block structure inconsistent after retries")


def span_closure(
    generators: Sequence,
    max_rounds: int = 24,
    rel_tol: float = RANK_TOL,
) -> tuple[list[np.ndarray], int]:
    """Basis of the unital algebra spanned by words in the generators.

    Breadth-first closure: start from the identity, right-multiply the
    frontier by every generator and adjoint, admit directions whose
    residual after projection on the current basis exceeds ``rel_tol``
    times the candidate scale.  Returns (basis, rounds); basis elements
    are orthonormal under :func:`hs_inner`.
    """
    mats, d = _gather(generators)
    mults = mats + [g.conj().T for g in mats]
    basis = np.eye(d, dtype=np.complex128).reshape(1, -1) / math.sqrt(d)
    frontier = basis.copy()
    rounds = 0
    for _ in range(max_rounds):
        f = frontier.shape[0]
        cand = np.empty((f * len(mults), d * d), dtype=np.complex128)
        cube = frontier.reshape(f, d, d)
        for gi, g in enumerate(mults):
            cand[gi * f:(gi + 1) * f] = (cube @ g).reshape(f, -1)
        scale = float(np.linalg.norm(cand, axis=1).max()) or 1.0
        # batched two-pass projection against the accumulated basis;
        # rows whose residual norm clears the rank threshold carry
        # genuinely new directions, the rest are float residue
        for _ in range(2):
            cand -= (cand @ basis.conj().T) @ basis
        live = np.linalg.norm(cand, axis=1) > rel_tol * scale
        rounds += 1
        if not live.any():
            break
        surv = cand[live]
        # rank-revealing admission through the survivor Gram matrix;
        # the eigenvalue cut sits well above the eigh noise floor
        # (~ lam_max * count * eps) and well below genuine directions
        gram = surv @ surv.conj().T
        vals, vecs = np.linalg.eigh(gram)
        keep = vals > 1e-10 * max(float(vals[-1]), 0.0)
        combo = vecs[:, keep].conj().T / np.sqrt(vals[keep])[:, None]
        new_rows = combo @ surv
        # polish: small-count modified Gram-Schmidt for orthonormality
        # near the admission threshold
        polished = []
        for c in new_rows:
            c = c - basis.T @ (basis.conj() @ c)
            for prow in polished:
                c = c - prow * (prow.conj() @ c)
            nrm = np.linalg.norm(c)
            if nrm <= rel_tol * scale:
                continue
            polished.append(c / nrm)
        if not polished:
            break
        frontier = np.array(polished)
        basis = np.vstack([basis, frontier])
    else:
        raise NumericError(f"span closure open after {max_rounds} rounds")
    out = [basis[i].reshape(d, d) * math.sqrt(d) for i in range(basis.shape[0])]
    return out, rounds


def generated_algebra_dim(
    generators: Sequence | Callable[[np.random.Generator], np.ndarray],
    budget: int = 8,
    rng: np.random.Generator | None = None,
    closure_generators: int = 4,
) -> tuple[int, AlgebraBasis]:
    """Dimension of the generated unital *-algebra, doubly certified.

    ``generators`` is either an explicit matrix list or a sampler
    called with an rng (one Haar draw per call).  For a sampler the
    budget doubles until the spectral-route dimension is unchanged
    across two successive doublings.  The final dimension must agree
    between the spectral block-structure route and an independent span
    closure, else :class:`NumericError`.
    """
    rng = np.random.default_rng(0xD1A1) if rng is None else rng
    if callable(generators):
        samples = [generators(rng) for _ in range(budget)]
        dim_prev = None
        stable = 0
        dim_spec = 0
        while True:
            _, dim_spec, _ = block_structure(samples, rng=rng)
            if dim_prev is not None and dim_spec == dim_prev:
                stable += 1
            else:
                stable = 0
            dim_prev = dim_spec
            if stable >= 2 or len(samples) >= 512:
                break
            samples += [generators(rng) for _ in range(len(samples))]
        mats = samples
    else:
        mats = [_as_matrix(g) for g in generators]
        if not mats:
            raise ValueError("empty generator list: pass the identity explicitly")
        _, dim_spec, _ = block_structure(mats, rng=rng)
    closure_mats = mats[: max(closure_generators, 1)]
    basis, _ = span_closure(closure_mats)
    if len(basis) != dim_spec:
        raise NumericError(
            f"span closure dim {len(basis)} vs spectral dim {dim_spec}"
        )
    space = getattr(generators[0], "space", None) if not callable(generators) else None
    return dim_spec, AlgebraBasis(space, tuple(basis), is_algebra=True)


def fixed_point_dimension(p: int, N: int) -> int:
    """Multiset count C(N^2 + p - 1, p): invariant dimension on p legs."""
    return math.comb(N * N + p - 1, p)


def _orbit_words(p: int, N: int) -> list[tuple[tuple[int, int], ...]]:
    letters = [(i, j) for i in range(N) for j in range(N)]
    return list(combinations_with_replacement(letters, p))


def fixed_point_basis(p: int, N: int, side: str = "left") -> AlgebraBasis:
    """Basis of leg-permutation-invariant multiplication operators.

    Each element is the model-space lift of a symmetrized matrix-unit
    word: the orbit sum over leg permutations of e_{i1 j1} x ... x
    e_{ip jp}, acting by left (or right) multiplication on each leg.
    Orbit sums over distinct multisets are orthogonal by construction,
    so orthonormalization is a per-element rescaling.

    Dense elements are materialized only while the model dimension
    stays small; beyond that the basis carries the dimension alone.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    space = ModelSpace(N, p, 0) if side == "left" else ModelSpace(N, 0, p)
    if space.dim > DENSE_CAP:
        raise CapExceededError(f"model dimension {space.dim} exceeds cap {DENSE_CAP}")
    dim = fixed_point_dimension(p, N)
    if space.dim > 256:
        return AlgebraBasis(space, (), is_algebra=True, dimension=dim)
    mult = left_mult if side == "left" else right_mult

    def unit(i: int, j: int) -> np.ndarray:
        e = np.zeros((N, N))
        e[i, j] = 1.0
        return e

    elements = []
    for word in _orbit_words(p, N):
        acc = StructuredOperator.zero(space)
        seen = set()
        for perm in permutations(range(p)):
            arranged = tuple(word[perm[k]] for k in range(p))
            if arranged in seen:
                continue
            seen.add(arranged)
            term = StructuredOperator.identity(space)
            for k, (i, j) in enumerate(arranged):
                term = term.compose(mult(space, unit(i, j), k))
            acc = acc + term
        mat = acc.to_dense().matrix
        nrm = math.sqrt(abs(hs_inner(mat, mat)))
        elements.append(mat / nrm)
    assert len(elements) == dim
    return AlgebraBasis(space, tuple(elements), is_algebra=True)


@dataclass(eq=False)
class GapReport:
    """Generated vs invariant-product dimensions for mixed leg actions."""

    p: int
    q: int
    N: int
    generated_dim: int
    fixed_dim: int
    relative_gap: float
    budget_used: int


def relative_gap(
    p: int,
    q: int,
    N: int,
    budget: int = 8,
    rng: np.random.Generator | None = None,
) -> GapReport:
    """Dimension gap between the algebra generated by u -> l(u)...r(u*)
    tensor actions and the product of one-sided invariant algebras.

    The generated dimension is certified by :func:`generated_algebra_dim`
    on Haar samples; the reference dimension is the product of multiset
    counts for the left and right sides.  The gap (f - g)/f closing as N
    grows is the finite-size shadow of the limiting statement; at finite
    N the difference is spanned by contraction operators, so g < f for
    mixed actions.
    """
    space = ModelSpace(N, p, q)
    if space.dim > DENSE_CAP:
        raise CapExceededError(f"model dimension {space.dim} exceeds cap {DENSE_CAP}")
    rng = np.random.default_rng(0x6A9 + 1000 * N + 10 * p + q) if rng is None else rng

    def sampler(r: np.random.Generator) -> np.ndarray:
        u = haar_unitary(N, r)
        op = StructuredOperator.identity(space)
        for k in range(p):
            op = op.compose(left_mult(space, u, k))
        for j in range(p, p + q):
            op = op.compose(right_mult(space, u.conj().T, j))
        return op.to_dense().matrix

    used = budget
    g, _ = generated_algebra_dim(sampler, budget=budget, rng=rng)
    f = fixed_point_dimension(p, N) * fixed_point_dimension(q, N)
    return GapReport(
        p=p,
        q=q,
        N=N,
        generated_dim=g,
        fixed_dim=f,
        relative_gap=(f - g) / f,
        budget_used=used,
    )


@dataclass(eq=False)
class SpanGrowthReport:
    """Cyclic-subspace growth of one-sided multiplication averages."""

    p: int
    N: int
    rounds: int
    cyclic_dim: int
    expected_dim: int
    generated_dim: int
    agree: bool


def span_growth_check(p: int, N: int) -> SpanGrowthReport:
    """Inductive cyclic-vector verification on p left legs.

    Starts from the identity vector, repeatedly applies the averaged
    left-multiplication operators t_plus(b) over a matrix-unit basis b,
    and grows the reached subspace until stable.  The reached dimension
    must equal the invariant-algebra dimension C(N^2 + p - 1, p), and
    the algebra generated by the same operators must have that
    dimension as well.
    """
    space = ModelSpace(N, p, 0)
    if space.dim > DENSE_CAP:
        raise CapExceededError(f"model dimension {space.dim} exceeds cap {DENSE_CAP}")
    ops = []
    for i in range(N):
        for j in range(N):
            e = np.zeros((N, N))
            e[i, j] = 1.0
            ops.append(t_plus(space, e))
    ident = np.eye(N, dtype=np.complex128).reshape(-1) / math.sqrt(N)
    vec = ident
    for _ in range(p - 1):
        vec = np.outer(vec, ident).reshape(-1)
    basis = vec[None, :] / np.linalg.norm(vec)
    frontier = basis.copy()
    rounds = 0
    while True:
        cands = []
        for row in frontier:
            for op in ops:
                cands.append(op.apply(row))
        new_rows = []
        scale = max(float(np.abs(np.array(cands)).max()), 1.0)
        for c in cands:
            c = c - basis.T @ (basis.conj() @ c)
            if np.linalg.norm(c) <= RANK_TOL * scale:
                continue
            c = c - basis.T @ (basis.conj() @ c)
            nrm = np.linalg.norm(c)
            if nrm <= RANK_TOL * scale:
                continue
            basis = np.vstack([basis, c / nrm])
            new_rows.append(c / nrm)
        if not new_rows:
            break
        frontier = np.array(new_rows)
        rounds += 1
        if rounds > 4 * p + 8:
            raise NumericError("cyclic span still growing, aborting")
    cyclic_dim = basis.shape[0]
    expected = fixed_point_dimension(p, N)
    gen_dim, _ = generated_algebra_dim([op.to_dense().matrix for op in ops])
    return SpanGrowthReport(
        p=p,
        N=N,
        rounds=rounds,
        cyclic_dim=cyclic_dim,
        expected_dim=expected,
        generated_dim=gen_dim,
        agree=(cyclic_dim == expected == gen_dim),
    )
