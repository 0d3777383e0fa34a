"""Crossed product of the full operator algebra by leg permutations.

The group G = S_p x S_q acts on operators over the model space by
conjugation with leg-permutation unitaries.  Elements of the crossed
product are finite sums sum_g Pi(a_g) lambda_g, stored as the block map
g -> a_g; multiplication twists by the action, (Pi(a) lambda_g)(Pi(b)
lambda_h) = Pi(a theta_g(b)) lambda_{gh}.  A dense realization on
l2(G, H) backs every algebraic identity with an independent oracle,
gated by the dimension cap.

At finite N the permutation action is inner, so the crossed product
has nontrivial center; its exact dimension is the number of conjugacy
classes of G, and center_basis returns the class-sum witnesses.  The
trace tau_hat reads off the identity block; the complementary trace on
the commutant side is computed through its delta-at-identity values on
the shift unitaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from math import factorial
from typing import Sequence

import numpy as np

from .algebra_tools import AlgebraBasis, orthonormalize
from .legops import (
    DENSE_CAP,
    CapExceededError,
    ModelSpace,
    NumericError,
    permutation_op,
    permuted_product_trace,
)
from .symcomb import Partition, cycle_type_of_permutation, dimension, enumerate_partitions

__all__ = [
    "ProductGroupElement",
    "CrossedOperator",
    "group_elements",
    "group_conjugacy_classes",
    "leg_unitary",
    "theta_apply",
    "crossed_multiply",
    "tau_hat",
    "center_basis",
    "CompressionReport",
    "compression_check",
    "TauPrimeValues",
    "trace_tau_prime",
    "TauPrimeRow",
    "tau_prime_table",
    "equivalence_criterion",
    "TraceInequalityReport",
    "trace_inequality_check",
]


def _compose(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(a[b[k]] for k in range(len(a)))


def _inverse(a: tuple[int, ...]) -> tuple[int, ...]:
    inv = [0] * len(a)
    for i, v in enumerate(a):
        inv[v] = i
    return tuple(inv)


@dataclass(frozen=True)
class ProductGroupElement:
    """Element (s, t) of S_p x S_q, one-line form, legs indexed from 0."""

    s: tuple[int, ...]
    t: tuple[int, ...]

    def __post_init__(self) -> None:
        for part in (self.s, self.t):
            if sorted(part) != list(range(len(part))):
                raise ValueError(f"{part} is not a permutation")

    @classmethod
    def identity(cls, p: int, q: int) -> "ProductGroupElement":
        return cls(tuple(range(p)), tuple(range(q)))

    @property
    def is_identity(self) -> bool:
        return self.s == tuple(range(len(self.s))) and self.t == tuple(
            range(len(self.t))
        )

    def compose(self, other: "ProductGroupElement") -> "ProductGroupElement":
        return ProductGroupElement(
            _compose(self.s, other.s), _compose(self.t, other.t)
        )

    def inverse(self) -> "ProductGroupElement":
        return ProductGroupElement(_inverse(self.s), _inverse(self.t))

    def combined(self) -> tuple[int, ...]:
        """One-line permutation of all p + q legs."""
        p = len(self.s)
        return self.s + tuple(p + v for v in self.t)

    def class_key(self) -> tuple:
        """Conjugacy class label: the pair of cycle types."""
        return (
            cycle_type_of_permutation(self.s).parts,
            cycle_type_of_permutation(self.t).parts,
        )


def group_elements(p: int, q: int) -> list[ProductGroupElement]:
    """All of S_p x S_q in a deterministic order."""
    return [
        ProductGroupElement(s, t)
        for s in permutations(range(p))
        for t in permutations(range(q))
    ]


def group_conjugacy_classes(p: int, q: int) -> list[list[ProductGroupElement]]:
    classes: dict[tuple, list[ProductGroupElement]] = {}
    for g in group_elements(p, q):
        classes.setdefault(g.class_key(), []).append(g)
    return [classes[k] for k in sorted(classes)]


@lru_cache(maxsize=256)
def _leg_unitary_cached(space: ModelSpace, combined: tuple[int, ...]) -> np.ndarray:
    mat = permutation_op(space, combined).to_dense().matrix
    mat.setflags(write=False)
    return mat


def leg_unitary(space: ModelSpace, g: ProductGroupElement) -> np.ndarray:
    """Dense unitary implementing the leg permutation of g on the model space."""
    if len(g.s) != space.p or len(g.t) != space.q:
        raise ValueError(f"group shape ({len(g.s)},{len(g.t)}) vs space ({space.p},{space.q})")
    return _leg_unitary_cached(space, g.combined())


def theta_apply(space: ModelSpace, g: ProductGroupElement, a: np.ndarray) -> np.ndarray:
    """Action of g on an operator over the model space: U_g a U_g*."""
    u = leg_unitary(space, g)
    return u @ a @ u.conj().T


class CrossedOperator:
    """Finite block sum sum_g Pi(a_g) lambda_g over the model space.

    Blocks index by the (s, t) tuples of the group element; the
    decomposition is unique, so two operators are equal exactly when
    all block differences vanish.
    """

    __slots__ = ("space", "blocks")

    def __init__(self, space: ModelSpace, blocks: dict | None = None):
        self.space = space
        clean: dict[tuple, np.ndarray] = {}
        for key, mat in (blocks or {}).items():
            g = key if isinstance(key, ProductGroupElement) else ProductGroupElement(*key)
            if len(g.s) != space.p or len(g.t) != space.q:
                raise ValueError("block group element does not match the space")
            arr = np.asarray(mat, dtype=np.complex128)
            if arr.shape != (space.dim, space.dim):
                raise ValueError(
                    f"block must be {space.dim}x{space.dim}, got {arr.shape}"
                )
            k = (g.s, g.t)
            clean[k] = clean[k] + arr if k in clean else arr.copy()
        self.blocks = {k: v for k, v in clean.items() if np.abs(v).max() > 0.0}

    # -- constructors ---------------------------------------------------

    @classmethod
    def embed(cls, space: ModelSpace, a: np.ndarray) -> "CrossedOperator":
        """Pi(a): the fiberwise copy of an operator a over the model space."""
        e = ProductGroupElement.identity(space.p, space.q)
        return cls(space, {e: a})

    @classmethod
    def shift(cls, space: ModelSpace, g: ProductGroupElement) -> "CrossedOperator":
        """lambda_g: the unitary implementing g in the crossed product."""
        return cls(space, {g: np.eye(space.dim)})

    @classmethod
    def zero(cls, space: ModelSpace) -> "CrossedOperator":
        return cls(space, {})

    # -- linear structure -----------------------------------------------

    def _check(self, other: "CrossedOperator") -> None:
        if self.space != other.space:
            raise ValueError("crossed operators on different spaces")

    def __add__(self, other: "CrossedOperator") -> "CrossedOperator":
        self._check(other)
        out = dict(self.blocks)
        for k, v in other.blocks.items():
            out[k] = out[k] + v if k in out else v
        return CrossedOperator(self.space, out)

    def __sub__(self, other: "CrossedOperator") -> "CrossedOperator":
        return self + other.scale(-1.0)

    def scale(self, c: complex) -> "CrossedOperator":
        return CrossedOperator(
            self.space, {k: c * v for k, v in self.blocks.items()}
        )

    def __mul__(self, c: complex) -> "CrossedOperator":
        return self.scale(c)

    __rmul__ = __mul__

    # -- algebra ----------------------------------------------------------

    def multiply(self, other: "CrossedOperator") -> "CrossedOperator":
        """Twisted product: c_k = sum over gh = k of a_g theta_g(b_h)."""
        self._check(other)
        space = self.space
        out: dict[tuple, np.ndarray] = {}
        for (gs, gt), a in self.blocks.items():
            g = ProductGroupElement(gs, gt)
            for (hs, ht), b in other.blocks.items():
                h = ProductGroupElement(hs, ht)
                k = g.compose(h)
                term = a @ theta_apply(space, g, b)
                key = (k.s, k.t)
                out[key] = out[key] + term if key in out else term
        return CrossedOperator(space, out)

    def __matmul__(self, other: "CrossedOperator") -> "CrossedOperator":
        return self.multiply(other)

    def adjoint(self) -> "CrossedOperator":
        """Block adjoint: the g block moves to g^{-1} as theta_{g^{-1}}(a_g*)."""
        out = {}
        for (gs, gt), a in self.blocks.items():
            ginv = ProductGroupElement(gs, gt).inverse()
            out[(ginv.s, ginv.t)] = theta_apply(self.space, ginv, a.conj().T)
        return CrossedOperator(self.space, out)

    # -- functionals ------------------------------------------------------

    def tau_hat(self) -> complex:
        """Normalized trace: the normalized trace of the identity block."""
        e = ProductGroupElement.identity(self.space.p, self.space.q)
        blk = self.blocks.get((e.s, e.t))
        if blk is None:
            return 0.0 + 0.0j
        return complex(np.trace(blk) / self.space.dim)

    def max_block_norm(self) -> float:
        """Largest Frobenius norm over blocks; zero iff the operator is zero."""
        if not self.blocks:
            return 0.0
        return max(float(np.linalg.norm(v)) for v in self.blocks.values())

    # -- dense oracle -----------------------------------------------------

    def to_dense_l2(self) -> np.ndarray:
        """Block matrix on l2(G, H): row g, column g' carries
        theta_{g^{-1}}(a_{g g'^{-1}}).
        """
        space = self.space
        elems = group_elements(space.p, space.q)
        n, d = len(elems), space.dim
        if n * d > DENSE_CAP:
            raise CapExceededError(f"l2 dimension {n * d} exceeds cap {DENSE_CAP}")
        index = {(g.s, g.t): i for i, g in enumerate(elems)}
        out = np.zeros((n * d, n * d), dtype=np.complex128)
        for (ls, lt), a in self.blocks.items():
            l = ProductGroupElement(ls, lt)
            for g in elems:
                col = g.inverse().compose(l).inverse()  # col = l^{-1} g
                i, j = index[(g.s, g.t)], index[(col.s, col.t)]
                out[i * d:(i + 1) * d, j * d:(j + 1) * d] = theta_apply(
                    space, g.inverse(), a
                )
        return out


def crossed_multiply(a: CrossedOperator, b: CrossedOperator) -> CrossedOperator:
    """Module-level alias for :meth:`CrossedOperator.multiply`."""
    return a.multiply(b)


def tau_hat(a: CrossedOperator) -> complex:
    """Module-level alias for :meth:`CrossedOperator.tau_hat`."""
    return a.tau_hat()


def center_basis(space: ModelSpace) -> tuple[AlgebraBasis, list[CrossedOperator]]:
    """Center of the crossed product, dense basis plus block witnesses.

    A central element must commute with every fiberwise Pi(a), forcing
    each block a_g into the scalar multiples of U_{g^{-1}} (the leg
    action is implemented by unitaries, so Pi(a)'s relative commutant
    picks up exactly the inner implementers); commuting with the shifts
    then forces the scalars to be constant on conjugacy classes.  The
    resulting class sums are returned both as crossed operators and as
    an orthonormal dense basis on l2(G, H), verified numerically.
    """
    elems = group_elements(space.p, space.q)
    if len(elems) * space.dim > DENSE_CAP:
        raise CapExceededError(
            f"l2 dimension {len(elems) * space.dim} exceeds cap {DENSE_CAP}"
        )
    witnesses = []
    for cls in group_conjugacy_classes(space.p, space.q):
        blocks = {}
        for g in cls:
            blocks[(g.s, g.t)] = leg_unitary(space, g.inverse())
        witnesses.append(CrossedOperator(space, blocks))
    dense = [w.to_dense_l2() for w in witnesses]
    # verify centrality against the generators of the dense algebra
    rng = np.random.default_rng(0xCE17E5)
    d = space.dim
    probes = []
    for _ in range(3):
        z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        probes.append(CrossedOperator.embed(space, z).to_dense_l2())
    for g in elems:
        probes.append(CrossedOperator.shift(space, g).to_dense_l2())
    for zmat in dense:
        scale = max(float(np.abs(zmat).max()), 1.0)
        for pmat in probes:
            if np.abs(zmat @ pmat - pmat @ zmat).max() > 1e-10 * scale * np.abs(pmat).max():
                raise NumericError("claimed center element fails to commute")
    basis = AlgebraBasis(None, tuple(orthonormalize(dense)), is_algebra=True)
    if basis.dim != len(witnesses):
        raise NumericError("center witnesses are not independent")
    return basis, witnesses


@dataclass(eq=False)
class CompressionReport:
    """Defects of the averaging-projection relations on l2(G, H)."""

    p: int
    q: int
    N: int
    projection_defect: float
    shift_defect: float
    average_defect: float
    fixed_dim_span: int
    fixed_dim_commutant: int

    @property
    def passed(self) -> bool:
        return (
            max(self.projection_defect, self.shift_defect, self.average_defect)
            <= 1e-10
            and self.fixed_dim_span == self.fixed_dim_commutant
        )


def compression_check(space: ModelSpace, samples: int = 12, seed: int = 0xC0DA) -> CompressionReport:
    """Averaging projection P = |G|^{-1} sum lambda_g and its relations.

    Verifies that P is an orthogonal projection, that P lambda_g P = P
    for every g (the compressed shifts act as the identity on the range
    of P), and that P Pi(a) P = Pi(abar) P with abar the group average
    of a.  The compressed fiber algebra is compared against the fixed
    points of the group action: the span of averaged samples must match
    the commutant of the leg unitaries.
    """
    from .algebra_tools import block_structure, commutant_basis, span_closure

    elems = group_elements(space.p, space.q)
    n, d = len(elems), space.dim
    if n * d > DENSE_CAP:
        raise CapExceededError(f"l2 dimension {n * d} exceeds cap {DENSE_CAP}")
    rng = np.random.default_rng(seed)
    pmat = np.zeros((n * d, n * d), dtype=np.complex128)
    for g in elems:
        pmat += CrossedOperator.shift(space, g).to_dense_l2()
    pmat /= n
    projection_defect = max(
        float(np.abs(pmat @ pmat - pmat).max()),
        float(np.abs(pmat.conj().T - pmat).max()),
    )
    shift_defect = 0.0
    for g in elems:
        lam = CrossedOperator.shift(space, g).to_dense_l2()
        shift_defect = max(
            shift_defect, float(np.abs(pmat @ lam @ pmat - pmat).max())
        )
    average_defect = 0.0
    averaged = []
    for _ in range(samples):
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        abar = sum(theta_apply(space, g, a) for g in elems) / n
        averaged.append(abar)
        lhs = pmat @ CrossedOperator.embed(space, a).to_dense_l2() @ pmat
        rhs = CrossedOperator.embed(space, abar).to_dense_l2() @ pmat
        average_defect = max(average_defect, float(np.abs(lhs - rhs).max()))
    span, _ = span_closure(averaged + [np.eye(d)])
    legs = [leg_unitary(space, g) for g in elems]
    if d <= 64:
        fixed_dim = commutant_basis(legs).dim
    else:
        _, _, fixed_dim = block_structure(legs)
    return CompressionReport(
        p=space.p,
        q=space.q,
        N=space.N,
        projection_defect=projection_defect,
        shift_defect=shift_defect,
        average_defect=average_defect,
        fixed_dim_span=len(span),
        fixed_dim_commutant=fixed_dim,
    )


@dataclass(frozen=True)
class TauPrimeValues:
    """Candidate values of the complementary trace on a central projection.

    ``from_delta_trace`` follows from the delta-at-identity trace on
    the shift basis of the commutant: the central projection attached
    to (lam, mu) has identity coefficient dim(lam)^2 dim(mu)^2 / (p!q!).
    ``dim_linear`` is the dimension-linear normalization dim(lam)
    dim(mu) / (p!q!).  The two agree exactly when both dimensions are
    1 and otherwise differ; downstream equivalence classes coincide
    either way because both are strictly increasing in the product.
    """

    from_delta_trace: Fraction
    dim_linear: Fraction


def trace_tau_prime(lam: Partition, mu: Partition) -> TauPrimeValues:
    p, q = lam.weight, mu.weight
    dl, dm = dimension(lam), dimension(mu)
    order = factorial(p) * factorial(q)
    return TauPrimeValues(
        from_delta_trace=Fraction(dl * dl * dm * dm, order),
        dim_linear=Fraction(dl * dm, order),
    )


@dataclass(frozen=True)
class TauPrimeRow:
    lam: Partition
    mu: Partition
    dim_lam: int
    dim_mu: int
    tau_delta_trace: Fraction
    tau_dim_linear: Fraction
    equiv_class: int


def tau_prime_table(p: int, q: int) -> list[TauPrimeRow]:
    """All (lam, mu) rows for fixed (p, q), with equivalence class ids.

    Class ids index the sorted distinct values of dim(lam) * dim(mu);
    two rows share a class exactly when the unitary-equivalence
    criterion holds for their projections.
    """
    pairs = [
        (lam, mu)
        for lam in enumerate_partitions(p)
        for mu in enumerate_partitions(q)
    ]
    products = sorted({dimension(lam) * dimension(mu) for lam, mu in pairs})
    rows = []
    for lam, mu in pairs:
        dl, dm = dimension(lam), dimension(mu)
        vals = trace_tau_prime(lam, mu)
        rows.append(
            TauPrimeRow(
                lam=lam,
                mu=mu,
                dim_lam=dl,
                dim_mu=dm,
                tau_delta_trace=vals.from_delta_trace,
                tau_dim_linear=vals.dim_linear,
                equiv_class=products.index(dl * dm),
            )
        )
    return rows


def equivalence_criterion(
    lam: Partition, mu: Partition, gamma: Partition, delta: Partition
) -> bool:
    """Unitary equivalence of the (lam, mu) and (gamma, delta) projections.

    Holds exactly when dim(lam) dim(mu) = dim(gamma) dim(delta); the
    weights must match pairwise.
    """
    if lam.weight != gamma.weight or mu.weight != delta.weight:
        raise ValueError("partition weights must match pairwise")
    return dimension(lam) * dimension(mu) == dimension(gamma) * dimension(delta)


@dataclass(eq=False)
class TraceInequalityReport:
    """Permuted-product trace bound over sampled unitary tuples."""

    N: int
    s: ProductGroupElement
    samples: int
    max_abs_trace: float
    bound: float
    equality_attained: bool
    all_within: bool


def trace_inequality_check(
    s: ProductGroupElement,
    unitaries: Sequence[Sequence[np.ndarray]],
    N: int,
) -> TraceInequalityReport:
    """Check |tr(U_s (u_1 x ... x u_m))| <= 1/N over plain tensor legs.

    The trace factors over the cycles of the combined permutation, each
    cycle contributing the plain trace of its unitary product; a
    non-identity permutation always has at most m - 1 cycles, which
    gives the 1/N bound, attained at identity unitaries when s is a
    transposition.
    """
    if s.is_identity:
        raise ValueError("the permutation must be non-trivial")
    sigma = s.combined()
    m = len(sigma)
    bound = 1.0 / N
    worst = 0.0
    for tup in unitaries:
        mats = [np.asarray(u, dtype=np.complex128) for u in tup]
        if len(mats) != m:
            raise ValueError(f"need {m} unitaries per tuple, got {len(mats)}")
        val = abs(permuted_product_trace(sigma, mats)) / N**m
        worst = max(worst, val)
    return TraceInequalityReport(
        N=N,
        s=s,
        samples=len(unitaries),
        max_abs_trace=worst,
        bound=bound,
        equality_attained=worst >= bound - 1e-12,
        all_within=worst <= bound + 1e-12,
    )
