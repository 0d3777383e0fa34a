"""Derivation-type operators, Haar averaging, and spectral binning.

This module builds the operators that drive the duality experiments:
the mixed one-sided multiplication sums, Young projections acting on a
chosen side of the legs, exact second-moment Haar averages through the
matrix-unit (Peter-Weyl) formula, a seeded Monte Carlo integrator for
cross-checking them, the conditional-expectation tower onto dyadic
block subalgebras, and the epsilon-mesh spectral binning of a Hermitian
matrix.

The exact averages really are exact: they return structured operators
whose coefficients are rational in 1/N, so downstream identities can be
tested at 1e-12 rather than at Monte Carlo resolution.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .legops import (
    DenseOperator,
    LegFactor,
    ModelSpace,
    OperatorTerm,
    StructuredOperator,
    identity_factor,
    left_mult,
    right_mult,
)
from .symcomb import Partition, character, cycle_type_of_permutation, dimension

__all__ = [
    "t_mixed",
    "t_plus",
    "t_minus",
    "young_projection",
    "haar_unitary",
    "HaarConfig",
    "MCAverage",
    "haar_average_mc",
    "haar_pair_average_exact",
    "SubfactorTower",
    "conditional_expectation",
    "sigma_residual",
    "sigma_average_exact",
    "product_average_exact",
    "LimitFormulaReport",
    "limit_formula_check",
    "SpectralGrid",
    "spectral_binning",
]


# -- one-sided multiplication sums --------------------------------------


def t_plus(space: ModelSpace, a: np.ndarray) -> StructuredOperator:
    """Sum of left multiplications by ``a`` over the left legs.

    An empty left side yields the zero operator.
    """
    out = StructuredOperator.zero(space)
    for k in range(space.p):
        out = out + left_mult(space, a, k)
    return out


def t_minus(space: ModelSpace, a: np.ndarray) -> StructuredOperator:
    """Sum of right multiplications by ``a`` over the right legs."""
    out = StructuredOperator.zero(space)
    for k in range(space.p, space.m):
        out = out + right_mult(space, a, k)
    return out


def t_mixed(space: ModelSpace, a: np.ndarray) -> StructuredOperator:
    """Left-multiplication sum minus right-multiplication sum."""
    return t_plus(space, a) - t_minus(space, a)


# -- Young projections ---------------------------------------------------


def _embedded_sigma(perm: tuple[int, ...], offset: int, m: int) -> tuple[int, ...]:
    sigma = list(range(m))
    for i, t in enumerate(perm):
        sigma[offset + i] = offset + t
    return tuple(sigma)


def young_projection(
    space: ModelSpace, lam: Partition, side: str = "left"
) -> StructuredOperator:
    """Central Young projection acting on one side's legs.

    (dim lam / b!) * sum over the symmetric group S_b of
    character(lam, class of s) * P(s), with the permutations embedded on
    the left legs (b = p) or the right legs (b = q).
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    block = space.p if side == "left" else space.q
    offset = 0 if side == "left" else space.p
    if lam.weight != block:
        raise ValueError(
            f"partition weight {lam.weight} does not match the {side} side size {block}"
        )
    if block == 0:
        return StructuredOperator.identity(space)
    scale = dimension(lam) / math.factorial(block)
    ident = identity_factor(space.N)
    terms = []
    for perm in itertools.permutations(range(block)):
        chi = character(lam, cycle_type_of_permutation(perm))
        if chi == 0:
            continue
        sigma = _embedded_sigma(perm, offset, space.m)
        terms.append(OperatorTerm(scale * chi, (ident,) * space.m, sigma))
    return StructuredOperator(space, terms)


# -- Haar sampling and averaging -----------------------------------------


def haar_unitary(N: int, rng: np.random.Generator) -> np.ndarray:
    """One Haar-distributed N x N unitary.

    QR of a complex Ginibre matrix with the R-diagonal phases folded
    back in, which makes the distribution exactly Haar rather than
    merely approximately invariant.
    """
    z = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


@dataclass(frozen=True)
class HaarConfig:
    """Monte Carlo budget: sample count, master seed, leg size, workers."""

    samples: int
    seed: int
    N: int
    workers: int = 4

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ValueError("need at least one sample")
        if self.workers < 1:
            raise ValueError("need at least one worker stream")


@dataclass(frozen=True, eq=False)
class MCAverage:
    """Empirical mean of a matrix-valued Haar integral.

    ``stderr`` is the Frobenius-aggregated standard error of the mean:
    the square root of the summed per-entry variances of the mean
    estimator.  Deterministic given (seed, workers).
    """

    mean: DenseOperator
    samples: int
    seed: int
    workers: int
    stderr: float


def haar_average_mc(f, config: HaarConfig) -> MCAverage:
    """Empirical Haar average of ``f(u)`` densified per sample.

    The sample budget is split across ``config.workers`` independent
    child seed streams; the reduction is a sum in worker order, so the
    result is reproducible for a fixed (seed, workers) pair.
    """
    streams = np.random.SeedSequence(config.seed).spawn(config.workers)
    base, extra = divmod(config.samples, config.workers)
    counts = [base + (1 if w < extra else 0) for w in range(config.workers)]
    total = None
    totalsq = None
    space = None
    for stream, count in zip(streams, counts):
        rng = np.random.default_rng(stream)
        for _ in range(count):
            u = haar_unitary(config.N, rng)
            dense = f(u).to_dense()
            if total is None:
                space = dense.space
                total = np.zeros_like(dense.matrix)
                totalsq = np.zeros(dense.matrix.shape)
            total += dense.matrix
            totalsq += np.abs(dense.matrix) ** 2
    n = config.samples
    mean = total / n
    if n > 1:
        entry_var = np.maximum(totalsq - n * np.abs(mean) ** 2, 0.0) / (n - 1)
        stderr = float(np.sqrt(entry_var.sum() / n))
    else:
        stderr = float("inf")
    return MCAverage(DenseOperator(space, mean), n, config.seed, config.workers, stderr)


def _block_units(N: int, block_dim: int) -> list[list[np.ndarray]]:
    if N % block_dim:
        raise ValueError(f"block dimension {block_dim} does not divide N={N}")
    pad = np.eye(N // block_dim)
    units = []
    for r in range(block_dim):
        row = []
        for s in range(block_dim):
            e = np.zeros((block_dim, block_dim))
            e[r, s] = 1.0
            row.append(np.kron(e, pad))
        units.append(row)
    return units


def haar_pair_average_exact(
    space: ModelSpace, k: int, j: int, mode: str, block_dim: int | None = None
) -> StructuredOperator:
    """Exact Haar average of a product of two one-leg unitary actions.

    Modes, with the average over u ranging across the unitaries of the
    leading block_dim x block_dim block (the full group by default):

    - ``ll``: integral of (left mult by u* on leg k)(left mult by u on leg j)
    - ``rr``: integral of (right mult by u* on leg k)(right mult by u on leg j)
    - ``lr``: integral of (left mult by u* on leg k)(right mult by u on leg j)

    By the second-moment matrix-unit formula each of these equals
    (1/D) * sum over matrix units e_rs placed at leg k and e_sr at leg
    j, in the mode's left/right positions, D being the block dimension.
    """
    space.check_leg(k)
    space.check_leg(j)
    if k == j:
        raise ValueError("pair average needs two distinct legs")
    if mode not in ("ll", "rr", "lr"):
        raise ValueError(f"mode must be 'll', 'rr' or 'lr', got {mode!r}")
    D = space.N if block_dim is None else block_dim
    units = _block_units(space.N, D)
    eye = np.eye(space.N)
    ident = identity_factor(space.N)
    terms = []
    for r in range(D):
        for s in range(D):
            factors = [ident] * space.m
            if mode[0] == "l":
                factors[k] = LegFactor(units[r][s], eye)
            else:
                factors[k] = LegFactor(eye, units[r][s])
            if mode[1] == "l":
                factors[j] = LegFactor(units[s][r], eye)
            else:
                factors[j] = LegFactor(eye, units[s][r])
            terms.append(
                OperatorTerm(1.0 / D, tuple(factors), tuple(range(space.m)))
            )
    return StructuredOperator(space, terms)


# -- conditional expectation tower ---------------------------------------


@dataclass(frozen=True)
class SubfactorTower:
    """Dyadic block tower inside M_N: N = 2^levels * complement."""

    levels: int
    complement: int

    def __post_init__(self) -> None:
        if self.levels < 1 or self.complement < 1:
            raise ValueError("need levels >= 1 and complement >= 1")

    @property
    def N(self) -> int:
        return 2**self.levels * self.complement

    @classmethod
    def for_leg_size(cls, N: int) -> "SubfactorTower":
        """Deepest dyadic tower inside M_N."""
        levels = 0
        rest = N
        while rest % 2 == 0:
            rest //= 2
            levels += 1
        if levels == 0:
            raise ValueError(f"leg size {N} has no dyadic factor")
        return cls(levels, rest)


def conditional_expectation(
    tower: SubfactorTower, level: int, a: np.ndarray
) -> np.ndarray:
    """Trace-preserving expectation onto the commutant of the 2^level block.

    Averages u a u* over unitaries of the leading 2^level x 2^level
    tensor factor, which works out to the normalized partial trace over
    that factor re-tensored with its identity.
    """
    if not 1 <= level <= tower.levels:
        raise ValueError(f"level {level} outside 1..{tower.levels}")
    N = tower.N
    a = np.asarray(a, dtype=np.complex128)
    if a.shape != (N, N):
        raise ValueError(f"expected {N}x{N}, got {a.shape}")
    D = 2**level
    K = N // D
    partial = np.einsum("ijil->jl", a.reshape(D, K, D, K)) / D
    return np.kron(np.eye(D), partial)


def _haar_expectation(
    a: np.ndarray, N: int, block_dim: int | None
) -> np.ndarray:
    if block_dim is None or block_dim == N:
        return (np.trace(a) / N) * np.eye(N)
    K = N // block_dim
    partial = np.einsum("ijil->jl", a.reshape(block_dim, K, block_dim, K))
    return np.kron(np.eye(block_dim), partial / block_dim)


# -- the residual of the product identity ---------------------------------


def _check_unitary(u: np.ndarray, N: int) -> np.ndarray:
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (N, N):
        raise ValueError(f"expected {N}x{N} unitary, got {u.shape}")
    if np.linalg.norm(u.conj().T @ u - np.eye(N)) > 1e-10 * np.sqrt(N):
        raise ValueError("matrix is not unitary within 1e-10")
    return u


def sigma_residual(
    space: ModelSpace, a: np.ndarray, u: np.ndarray
) -> StructuredOperator:
    """Cross-leg remainder of the product of two mixed multiplication sums.

    The product t_mixed(a u*) o t_mixed(u) splits into same-leg terms,
    which collapse to left mult by a and right mult by u a u*, plus the
    four cross-leg sums returned here: left-left and right-right pairs
    enter positively, the two left-right combinations negatively.
    """
    u = _check_unitary(u, space.N)
    a = np.asarray(a, dtype=np.complex128)
    au = a @ u.conj().T
    out = StructuredOperator.zero(space)
    left = range(space.p)
    right = range(space.p, space.m)
    for k in left:
        for j in left:
            if k != j:
                out = out + left_mult(space, au, k).compose(left_mult(space, u, j))
    for k in right:
        for j in right:
            if k != j:
                out = out + right_mult(space, au, k).compose(right_mult(space, u, j))
    for k in left:
        for j in right:
            out = out - left_mult(space, au, k).compose(right_mult(space, u, j))
            out = out - right_mult(space, au, j).compose(left_mult(space, u, k))
    return out


def sigma_average_exact(
    space: ModelSpace, a: np.ndarray, block_dim: int | None = None
) -> StructuredOperator:
    """Exact Haar average of the cross-leg remainder.

    Averaging each cross pair through the matrix-unit formula gives

    - left-left pairs:   (left mult by a at k) o pair_average_ll(k, j)
    - right-right pairs: pair_average_rr(k, j) o (right mult by a at k)
    - left-right pairs:  minus (left mult by a at k) o pair_average_lr(k, j)
                         minus pair_average_lr(k, j) o (right mult by a at j)

    using that Haar measure is invariant under u -> u*.
    """
    a = np.asarray(a, dtype=np.complex128)
    out = StructuredOperator.zero(space)
    left = range(space.p)
    right = range(space.p, space.m)
    for k in left:
        for j in left:
            if k != j:
                pair = haar_pair_average_exact(space, k, j, "ll", block_dim)
                out = out + left_mult(space, a, k).compose(pair)
    for k in right:
        for j in right:
            if k != j:
                pair = haar_pair_average_exact(space, k, j, "rr", block_dim)
                out = out + pair.compose(right_mult(space, a, k))
    for k in left:
        for j in right:
            pair = haar_pair_average_exact(space, k, j, "lr", block_dim)
            out = out - left_mult(space, a, k).compose(pair)
            out = out - pair.compose(right_mult(space, a, j))
    return out


def product_average_exact(
    space: ModelSpace, a: np.ndarray, block_dim: int | None = None
) -> StructuredOperator:
    """Exact Haar average of t_mixed(a u*) o t_mixed(u).

    Assembled termwise from the matrix-unit pair averages: the same-leg
    contributions average to t_plus(a) plus t_minus of the block
    expectation of a, and the cross terms to the averaged remainder.
    """
    a = np.asarray(a, dtype=np.complex128)
    expected = _haar_expectation(a, space.N, block_dim)
    return (
        t_plus(space, a)
        + t_minus(space, expected)
        + sigma_average_exact(space, a, block_dim)
    )


@dataclass(frozen=True)
class LimitFormulaReport:
    """Measured residuals of the averaged product identity.

    ``residual_*`` measure the averaged product minus the difference
    form t_plus(a) - t_minus(E(a)); ``sigma_average_*`` measure the
    averaged cross-leg remainder alone, i.e. the residual against the
    sum form t_plus(a) + t_minus(E(a)).  ``stated_bound`` is the
    reference envelope 2 * |a|^2 * (p+q)^2 / N the rate experiments
    compare against.
    """

    N: int
    p: int
    q: int
    block_dim: int | None
    a_op_norm: float
    residual_op_norm: float
    residual_hs_norm: float
    sigma_average_op_norm: float
    sigma_average_hs_norm: float
    stated_bound: float


def limit_formula_check(
    space: ModelSpace,
    a: np.ndarray,
    tower: SubfactorTower | None = None,
    level: int | None = None,
    norm_tol: float = 1e-8,
) -> LimitFormulaReport:
    """Measure how far the averaged product is from the difference form.

    With no tower the average runs over the full unitary group of the
    leg and E(a) is the normalized trace times the identity; with a
    tower and level, over the dyadic block subgroup with E the
    conditional expectation of that level.
    """
    a = np.asarray(a, dtype=np.complex128)
    if tower is not None:
        if level is None:
            raise ValueError("a tower level is required with a tower")
        if tower.N != space.N:
            raise ValueError("tower leg size does not match the space")
        block_dim = 2**level
        expected = conditional_expectation(tower, level, a)
    else:
        block_dim = None
        expected = _haar_expectation(a, space.N, None)
    averaged = product_average_exact(space, a, block_dim)
    stated = t_plus(space, a) - t_minus(space, expected)
    residual = averaged - stated
    sigma_avg = sigma_average_exact(space, a, block_dim)
    a_norm = float(np.linalg.norm(a, 2))
    return LimitFormulaReport(
        N=space.N,
        p=space.p,
        q=space.q,
        block_dim=block_dim,
        a_op_norm=a_norm,
        residual_op_norm=residual.operator_norm(norm_tol),
        residual_hs_norm=residual.hs_norm(),
        sigma_average_op_norm=sigma_avg.operator_norm(norm_tol),
        sigma_average_hs_norm=sigma_avg.hs_norm(),
        stated_bound=2.0 * a_norm**2 * space.m**2 / space.N,
    )


# -- spectral binning ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Mesh over the spectrum: cuts a_0 < ... < a_M with representatives.

    Adjacent cuts are strictly closer than the epsilon that produced the
    grid, the first cut is the smallest eigenvalue, and the last cut lies
    strictly above the largest, so every eigenvalue falls inside one bin
    [a_i, a_{i+1}).
    """

    lower: float
    upper: float
    cuts: np.ndarray
    representatives: np.ndarray


def spectral_binning(
    A: np.ndarray, eps: float
) -> tuple[np.ndarray, SpectralGrid, list[np.ndarray]]:
    """Bin the spectrum of a Hermitian matrix to mesh below ``eps``.

    Returns (A_eps, grid, projections): A_eps replaces every eigenvalue
    by its bin representative (the multiplicity-weighted mean of the
    bin's eigenvalues, so single-eigenvalue bins are reproduced
    exactly), the projections are the pairwise orthogonal spectral
    projections of the bins and sum to the identity, and the operator
    norm of A - A_eps is strictly below eps.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    A = np.asarray(A, dtype=np.complex128)
    scale = max(1.0, float(np.linalg.norm(A)))
    if np.linalg.norm(A - A.conj().T) > 1e-10 * scale:
        raise ValueError("matrix is not Hermitian within 1e-10")
    eigvals, eigvecs = np.linalg.eigh((A + A.conj().T) / 2)
    lower = float(eigvals[0])
    upper = float(eigvals[-1])
    width = 0.99 * eps
    nbins = int(np.floor((upper - lower) / width)) + 1
    cuts = lower + width * np.arange(nbins + 1)
    bin_of = np.minimum(
        np.floor((eigvals - lower) / width).astype(int), nbins - 1
    )
    reps = np.empty(nbins)
    for i in range(nbins):
        mask = bin_of == i
        reps[i] = eigvals[mask].mean() if mask.any() else (cuts[i] + cuts[i + 1]) / 2
    binned_vals = reps[bin_of]
    a_eps = (eigvecs * binned_vals) @ eigvecs.conj().T
    a_eps = (a_eps + a_eps.conj().T) / 2
    projections = []
    for i in range(nbins):
        cols = eigvecs[:, bin_of == i]
        projections.append(cols @ cols.conj().T)
    grid = SpectralGrid(lower, upper, cuts, reps)
    return a_eps, grid, projections
