"""Structured operators on tensor powers of a tracial matrix algebra.

The model Hilbert space has m = p + q legs, each a copy of the N x N
matrices with the normalized trace inner product <x, y> = tr(x y*)/N.
Every operator handled here is a finite sum of terms

    coefficient * (leg permutation) o (per-leg sandwich x -> A x B),

the sandwich acting first.  This shape is closed under sums, products,
adjoints and the conjugation J: it covers one-sided multiplication
operators, leg permutations, Young projections, Haar pair averages and
all their products, while never materializing an N^(2m) x N^(2m) matrix
unless explicitly asked to.

Traces are evaluated exactly through the cycle factorization of the
permutation part, norms by power iteration on the matrix-free apply.
Dense materialization is capped; the cap guards the commutant solvers
downstream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

MERGE_TOL = 1e-14
FACTOR_MERGE_TOL = 1e-12
DENSE_CAP = 4096

__all__ = [
    "MERGE_TOL",
    "FACTOR_MERGE_TOL",
    "DENSE_CAP",
    "ModelSpace",
    "LegFactor",
    "OperatorTerm",
    "StructuredOperator",
    "DenseOperator",
    "SpaceMismatchError",
    "CapExceededError",
    "NumericError",
    "PowerIterationError",
    "identity_factor",
    "left_mult",
    "right_mult",
    "permutation_op",
    "permuted_product_trace",
    "save_dense",
    "load_dense",
]


class SpaceMismatchError(ValueError):
    """Operands live on different model spaces."""


class CapExceededError(RuntimeError):
    """A dense materialization would exceed the configured cap."""


class NumericError(RuntimeError):
    """A numerical routine could not certify its result."""


class PowerIterationError(NumericError):
    """Power iteration failed to converge within the iteration budget."""


@dataclass(frozen=True)
class ModelSpace:
    """Shape of the model space: leg size N, p left legs, q right legs."""

    N: int
    p: int
    q: int

    def __post_init__(self) -> None:
        if self.N < 2:
            raise ValueError("leg size N must be at least 2")
        if self.p < 0 or self.q < 0 or self.p + self.q < 1:
            raise ValueError("need p, q >= 0 and at least one leg")

    @property
    def m(self) -> int:
        return self.p + self.q

    @property
    def leg_dim(self) -> int:
        return self.N * self.N

    @property
    def dim(self) -> int:
        return self.leg_dim**self.m

    def check_leg(self, k: int) -> None:
        if not 0 <= k < self.m:
            raise ValueError(f"leg {k} out of range for m={self.m}")


def _sanitize(a: np.ndarray, N: int) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(a, dtype=np.complex128)) + 0j
    if arr.shape != (N, N):
        raise ValueError(f"expected a {N}x{N} matrix, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=32)
def identity_factor(N: int) -> "LegFactor":
    """Shared identity sandwich for leg size N."""
    return LegFactor(np.eye(N), np.eye(N))


@dataclass(frozen=True, eq=False)
class LegFactor:
    """One-leg sandwich map x -> A x B."""

    A: np.ndarray
    B: np.ndarray
    is_identity: bool = field(init=False, default=False)

    def __post_init__(self) -> None:
        N = np.asarray(self.A).shape[0]
        object.__setattr__(self, "A", _sanitize(self.A, N))
        object.__setattr__(self, "B", _sanitize(self.B, N))
        eye = np.eye(N)
        object.__setattr__(
            self,
            "is_identity",
            bool(np.array_equal(self.A, eye) and np.array_equal(self.B, eye)),
        )

    def star(self) -> "LegFactor":
        """Adjoint sandwich in the trace inner product: (A, B) -> (A*, B*)."""
        if self.is_identity:
            return self
        return LegFactor(self.A.conj().T, self.B.conj().T)

    def flip(self) -> "LegFactor":
        """J-conjugate sandwich: (A, B) -> (B*, A*)."""
        if self.is_identity:
            return self
        return LegFactor(self.B.conj().T, self.A.conj().T)

    def is_zero(self) -> bool:
        return not (np.any(self.A) and np.any(self.B))

    def signature(self) -> bytes:
        if self.is_identity:
            return b"I"
        return self.A.tobytes() + self.B.tobytes()


def _compose_factors(outer: LegFactor, inner: LegFactor) -> LegFactor:
    # outer is applied after inner: x -> A_out (A_in x B_in) B_out
    if outer.is_identity:
        return inner
    if inner.is_identity:
        return outer
    return LegFactor(outer.A @ inner.A, inner.B @ outer.B)


def _invert(sigma: tuple[int, ...]) -> tuple[int, ...]:
    inv = [0] * len(sigma)
    for i, s in enumerate(sigma):
        inv[s] = i
    return tuple(inv)


def _factors_close(
    fs: tuple[LegFactor, ...], gs: tuple[LegFactor, ...]
) -> bool:
    for f, g in zip(fs, gs):
        if f is g:
            continue
        tol = FACTOR_MERGE_TOL * (1.0 + max(np.abs(f.A).max(), np.abs(f.B).max()))
        if np.abs(f.A - g.A).max() > tol or np.abs(f.B - g.B).max() > tol:
            return False
    return True


@dataclass(frozen=True, eq=False)
class OperatorTerm:
    """coefficient * P(sigma) o (per-leg sandwiches), sandwiches first.

    ``sigma`` is a permutation of 0..m-1 in one-line form: the content
    of leg k is moved to leg sigma(k) after the sandwiches act, so the
    output at leg k is factors[sigma^-1(k)] applied to input leg
    sigma^-1(k).
    """

    coefficient: complex
    factors: tuple[LegFactor, ...]
    sigma: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.sigma) != list(range(len(self.factors))):
            raise ValueError(f"sigma {self.sigma} is not a permutation")

    def signature(self) -> tuple:
        return (self.sigma, tuple(f.signature() for f in self.factors))

    def is_zero_term(self) -> bool:
        return any(f.is_zero() for f in self.factors)


class StructuredOperator:
    """Canonical sum of :class:`OperatorTerm` on a fixed model space.

    Instances are immutable; all algebra returns new canonicalized
    operators.  Terms with equal (sigma, factor) signatures merge; after
    the exact pass, terms sharing a permutation whose factors agree
    entrywise within ``FACTOR_MERGE_TOL`` also merge, so products like
    (a u*) u collapse back onto a instead of surviving as float twins.
    Terms with coefficient magnitude below ``MERGE_TOL`` or with an
    exactly zero factor are dropped.
    """

    __slots__ = ("space", "terms")

    def __init__(self, space: ModelSpace, terms: list[OperatorTerm] | tuple = ()):
        self.space = space
        self.terms: tuple[OperatorTerm, ...] = self._canonicalize(space, terms)

    @staticmethod
    def _canonicalize(space, terms) -> tuple[OperatorTerm, ...]:
        merged: dict[tuple, OperatorTerm] = {}
        for t in terms:
            if len(t.factors) != space.m:
                raise SpaceMismatchError(
                    f"term has {len(t.factors)} legs, space has {space.m}"
                )
            if any(f.A.shape[0] != space.N for f in t.factors):
                raise SpaceMismatchError("leg size mismatch")
            if t.is_zero_term():
                continue
            key = t.signature()
            if key in merged:
                prev = merged[key]
                merged[key] = OperatorTerm(
                    prev.coefficient + t.coefficient, prev.factors, prev.sigma
                )
            else:
                merged[key] = t
        exact = sorted(merged.values(), key=lambda t: t.signature())
        # Second pass: within each permutation class, fold terms whose
        # factors are float-level duplicates of an earlier representative.
        # Sorting first keeps the chosen representatives deterministic.
        by_sigma: dict[tuple, list[OperatorTerm]] = {}
        for t in exact:
            by_sigma.setdefault(t.sigma, []).append(t)
        kept: list[OperatorTerm] = []
        for group in by_sigma.values():
            reps: list[OperatorTerm] = []
            for t in group:
                for i, r in enumerate(reps):
                    if _factors_close(t.factors, r.factors):
                        reps[i] = OperatorTerm(
                            r.coefficient + t.coefficient, r.factors, r.sigma
                        )
                        break
                else:
                    reps.append(t)
            kept.extend(reps)
        kept = [t for t in kept if abs(t.coefficient) >= MERGE_TOL]
        kept.sort(key=lambda t: t.signature())
        return tuple(kept)

    # -- construction -------------------------------------------------

    @classmethod
    def zero(cls, space: ModelSpace) -> "StructuredOperator":
        return cls(space, [])

    @classmethod
    def identity(cls, space: ModelSpace) -> "StructuredOperator":
        ident = identity_factor(space.N)
        term = OperatorTerm(1.0, (ident,) * space.m, tuple(range(space.m)))
        return cls(space, [term])

    # -- linear structure ---------------------------------------------

    def _check_space(self, other: "StructuredOperator") -> None:
        if self.space != other.space:
            raise SpaceMismatchError(f"{self.space} vs {other.space}")

    def __add__(self, other: "StructuredOperator") -> "StructuredOperator":
        self._check_space(other)
        return StructuredOperator(self.space, list(self.terms) + list(other.terms))

    def __sub__(self, other: "StructuredOperator") -> "StructuredOperator":
        return self + (-other)

    def __neg__(self) -> "StructuredOperator":
        return self.scale(-1.0)

    def scale(self, c: complex) -> "StructuredOperator":
        return StructuredOperator(
            self.space,
            [OperatorTerm(c * t.coefficient, t.factors, t.sigma) for t in self.terms],
        )

    def __mul__(self, c: complex) -> "StructuredOperator":
        return self.scale(c)

    __rmul__ = __mul__

    # -- algebra -------------------------------------------------------

    def compose(self, other: "StructuredOperator") -> "StructuredOperator":
        """Operator product self o other (other acts first)."""
        self._check_space(other)
        m = self.space.m
        out = []
        for tx in self.terms:
            for ty in other.terms:
                sigma = tuple(tx.sigma[ty.sigma[k]] for k in range(m))
                factors = tuple(
                    _compose_factors(tx.factors[ty.sigma[k]], ty.factors[k])
                    for k in range(m)
                )
                out.append(
                    OperatorTerm(tx.coefficient * ty.coefficient, factors, sigma)
                )
        return StructuredOperator(self.space, out)

    def __matmul__(self, other: "StructuredOperator") -> "StructuredOperator":
        return self.compose(other)

    def adjoint(self) -> "StructuredOperator":
        """Adjoint in the trace inner product."""
        out = []
        for t in self.terms:
            inv = _invert(t.sigma)
            factors = tuple(t.factors[inv[j]].star() for j in range(len(inv)))
            out.append(OperatorTerm(np.conj(t.coefficient), factors, inv))
        return StructuredOperator(self.space, out)

    def j_conjugate(self) -> "StructuredOperator":
        """Conjugation by the leg-wise antiunitary eta -> eta*.

        Swaps every sandwich (A, B) to (B*, A*) and conjugates the
        coefficient; the permutation part is unchanged.
        """
        out = []
        for t in self.terms:
            factors = tuple(f.flip() for f in t.factors)
            out.append(OperatorTerm(np.conj(t.coefficient), factors, t.sigma))
        return StructuredOperator(self.space, out)

    # -- analysis ------------------------------------------------------

    def normalized_trace(self) -> complex:
        """Exact normalized trace via the cycle factorization.

        Each cycle of the permutation part contributes the trace of the
        A-factors multiplied along the cycle times the trace of the
        B-factors multiplied against it; the product over cycles is
        divided by N^(2m).
        """
        space = self.space
        total = 0.0 + 0.0j
        for t in self.terms:
            total += t.coefficient * _term_trace(t, space.N)
        return complex(total / space.dim)

    def hs_norm(self) -> float:
        """Normalized Hilbert-Schmidt norm sqrt(trace(X* X))."""
        val = self.adjoint().compose(self).normalized_trace().real
        return float(np.sqrt(max(val, 0.0)))

    def is_zero(self, tol: float = 1e-10) -> bool:
        if not self.terms:
            return True
        return self.hs_norm() <= tol

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Matrix-free action on a vector of length N^(2m)."""
        space = self.space
        if v.shape != (space.dim,):
            raise ValueError(f"expected vector of length {space.dim}")
        shape = [space.N] * (2 * space.m)
        w_in = np.asarray(v, dtype=np.complex128).reshape(shape)
        out = np.zeros(shape, dtype=np.complex128)
        for t in self.terms:
            w = w_in
            for k, f in enumerate(t.factors):
                if f.is_identity:
                    continue
                w = np.moveaxis(np.tensordot(f.A, w, axes=([1], [2 * k])), 0, 2 * k)
                w = np.moveaxis(
                    np.tensordot(w, f.B, axes=([2 * k + 1], [0])), -1, 2 * k + 1
                )
            inv = _invert(t.sigma)
            axes = []
            for k in range(space.m):
                axes.extend((2 * inv[k], 2 * inv[k] + 1))
            out += t.coefficient * w.transpose(axes)
        return out.reshape(space.dim)

    def to_dense(self, cap: int = DENSE_CAP) -> "DenseOperator":
        """Explicit matrix; guarded by the dense cap."""
        space = self.space
        if space.dim > cap:
            raise CapExceededError(
                f"dense dimension {space.dim} exceeds cap {cap}"
            )
        mat = np.zeros((space.dim, space.dim), dtype=np.complex128)
        shape = [space.N] * (2 * space.m)
        for t in self.terms:
            sandwich = np.ones((1, 1), dtype=np.complex128)
            for f in t.factors:
                sandwich = np.kron(sandwich, np.kron(f.A, f.B.T))
            inv = _invert(t.sigma)
            axes = []
            for k in range(space.m):
                axes.extend((2 * inv[k], 2 * inv[k] + 1))
            idx = np.arange(space.dim).reshape(shape).transpose(axes).reshape(-1)
            mat += t.coefficient * sandwich[idx, :]
        return DenseOperator(space, mat)

    def operator_norm(
        self, tol: float = 1e-8, max_iter: int = 5000, restarts: int = 2
    ) -> float:
        """Largest singular value by power iteration on X* X.

        Matrix-free: alternates apply(X) and apply(X*).  Deterministic
        start vectors; raises :class:`PowerIterationError` if no restart
        converges to relative accuracy ``tol``.
        """
        if not self.terms:
            return 0.0
        adj = self.adjoint()
        dim = self.space.dim
        rng = np.random.default_rng(0x5EED)
        best = 0.0
        converged = False
        for _ in range(restarts + 1):
            v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            v /= np.linalg.norm(v)
            est = 0.0
            for _ in range(max_iter):
                w = adj.apply(self.apply(v))
                norm_w = np.linalg.norm(w)
                if norm_w < 1e-300:
                    est = 0.0
                    converged = True
                    break
                new_est = float(np.sqrt(norm_w))
                v = w / norm_w
                if est > 0 and abs(new_est - est) <= tol * new_est:
                    est = new_est
                    converged = True
                    break
                est = new_est
            best = max(best, est)
        if not converged:
            raise PowerIterationError(
                f"no convergence to rel. tol {tol} in {max_iter} iterations"
            )
        return best

    # -- bookkeeping ---------------------------------------------------

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        return (
            f"StructuredOperator(N={self.space.N}, p={self.space.p}, "
            f"q={self.space.q}, terms={len(self.terms)})"
        )


def _term_trace(t: OperatorTerm, N: int) -> complex:
    total = 1.0 + 0.0j
    seen = [False] * len(t.sigma)
    for start in range(len(t.sigma)):
        if seen[start]:
            continue
        a_prod = np.eye(N, dtype=np.complex128)
        b_prod = np.eye(N, dtype=np.complex128)
        k = start
        while not seen[k]:
            seen[k] = True
            f = t.factors[k]
            if not f.is_identity:
                a_prod = f.A @ a_prod
                b_prod = b_prod @ f.B
            k = t.sigma[k]
        total *= np.trace(a_prod) * np.trace(b_prod)
    return total


def permuted_product_trace(
    sigma: tuple[int, ...], matrices: list[np.ndarray]
) -> complex:
    """Unnormalized trace of P(sigma) composed with tensor factors.

    Returns the product over cycles of sigma of the trace of the
    matrices multiplied along the cycle.  This is the plain-tensor-leg
    version of the cycle formula used by ``normalized_trace``; dividing
    by N^m gives the normalized trace on (C^N)^tensor-m.
    """
    if sorted(sigma) != list(range(len(matrices))):
        raise ValueError("sigma is not a permutation of the matrix list")
    total = 1.0 + 0.0j
    seen = [False] * len(sigma)
    n = matrices[0].shape[0]
    for start in range(len(sigma)):
        if seen[start]:
            continue
        prod = np.eye(n, dtype=np.complex128)
        k = start
        while not seen[k]:
            seen[k] = True
            prod = matrices[k] @ prod
            k = sigma[k]
        total *= np.trace(prod)
    return complex(total)


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """Explicit matrix on the model space."""

    space: ModelSpace
    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = np.ascontiguousarray(np.asarray(self.matrix, dtype=np.complex128))
        if mat.shape != (self.space.dim, self.space.dim):
            raise ValueError(
                f"expected {self.space.dim}x{self.space.dim}, got {mat.shape}"
            )
        object.__setattr__(self, "matrix", mat)

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def adjoint(self) -> "DenseOperator":
        return DenseOperator(self.space, self.matrix.conj().T)

    def compose(self, other: "DenseOperator") -> "DenseOperator":
        if self.space != other.space:
            raise SpaceMismatchError(f"{self.space} vs {other.space}")
        return DenseOperator(self.space, self.matrix @ other.matrix)

    def normalized_trace(self) -> complex:
        return complex(np.trace(self.matrix) / self.space.dim)


# -- builders ----------------------------------------------------------


def left_mult(space: ModelSpace, a: np.ndarray, k: int) -> StructuredOperator:
    """Left multiplication by ``a`` on leg ``k``: eta_k -> a eta_k."""
    space.check_leg(k)
    ident = identity_factor(space.N)
    factors = [ident] * space.m
    factors[k] = LegFactor(a, np.eye(space.N))
    return StructuredOperator(
        space, [OperatorTerm(1.0, tuple(factors), tuple(range(space.m)))]
    )


def right_mult(space: ModelSpace, a: np.ndarray, k: int) -> StructuredOperator:
    """Right multiplication by ``a`` on leg ``k``: eta_k -> eta_k a."""
    space.check_leg(k)
    ident = identity_factor(space.N)
    factors = [ident] * space.m
    factors[k] = LegFactor(np.eye(space.N), a)
    return StructuredOperator(
        space, [OperatorTerm(1.0, tuple(factors), tuple(range(space.m)))]
    )


def permutation_op(space: ModelSpace, sigma: tuple[int, ...]) -> StructuredOperator:
    """Leg permutation: the content of leg k moves to leg sigma(k).

    On elementary tensors the output at leg k is the input at
    sigma^-1(k).
    """
    if sorted(sigma) != list(range(space.m)):
        raise ValueError(f"sigma {sigma} is not a permutation of 0..{space.m - 1}")
    ident = identity_factor(space.N)
    return StructuredOperator(
        space, [OperatorTerm(1.0, (ident,) * space.m, tuple(sigma))]
    )


# -- flat binary serialization ------------------------------------------

_MAGIC = b"DLABBIN1"


def save_dense(
    path: str | Path,
    array: np.ndarray,
    space: ModelSpace,
    kind: str = "operator",
) -> None:
    """Write an array in the flat binary layout with a JSON header.

    Layout: 8-byte magic, little-endian uint64 header length, UTF-8
    JSON header {N, p, q, m, kind, shape}, then the array entries
    row-major as little-endian interleaved real/imaginary doubles.
    """
    arr = np.ascontiguousarray(np.asarray(array, dtype=np.complex128))
    header = {
        "N": space.N,
        "p": space.p,
        "q": space.q,
        "m": space.m,
        "kind": kind,
        "shape": list(arr.shape),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(np.uint64(len(blob)).tobytes())
        fh.write(blob)
        fh.write(arr.astype("<c16").tobytes())


def load_dense(path: str | Path) -> tuple[np.ndarray, ModelSpace, str]:
    """Read an array written by :func:`save_dense`."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r} in {path}")
        (hlen,) = np.frombuffer(fh.read(8), dtype="<u8")
        header = json.loads(fh.read(int(hlen)).decode("utf-8"))
        payload = fh.read()
    arr = np.frombuffer(payload, dtype="<c16").reshape(header["shape"]).copy()
    space = ModelSpace(header["N"], header["p"], header["q"])
    return arr, space, header["kind"]
