"""Crossed-product blocks, traces, and the finite group machinery.

The l2(G, H) representation doubles as the oracle: block-level
products, adjoints, and traces must match plain matrix algebra after
densification, and conventions that drift (twist side, inverse
placement) break that agreement immediately.
"""

import numpy as np
import pytest

from duallab.crossed import (
    CrossedOperator,
    ProductGroupElement,
    center_basis,
    compression_check,
    crossed_multiply,
    equivalence_criterion,
    group_conjugacy_classes,
    group_elements,
    leg_unitary,
    tau_hat,
    tau_prime_table,
    theta_apply,
    trace_inequality_check,
    trace_tau_prime,
)
from duallab.duality_core import haar_unitary
from duallab.legops import CapExceededError, ModelSpace
from duallab.symcomb import Partition, enumerate_partitions

from fractions import Fraction
from math import factorial

RNG = np.random.default_rng(0xC505)


def rand_mat(n, rng=RNG):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def rand_crossed(space, rng=RNG, n_blocks=2):
    elems = group_elements(space.p, space.q)
    picks = rng.choice(len(elems), size=min(n_blocks, len(elems)), replace=False)
    return CrossedOperator(
        space, {elems[i]: rand_mat(space.dim, rng) for i in picks}
    )


def leg_perm_dense(space, sigma):
    D = space.leg_dim
    dims = [D] * space.m
    mat = np.zeros((space.dim, space.dim))
    for idx in np.ndindex(*dims):
        out = [0] * space.m
        for k in range(space.m):
            out[sigma[k]] = idx[k]
        mat[np.ravel_multi_index(out, dims), np.ravel_multi_index(idx, dims)] = 1.0
    return mat


# -- group elements ------------------------------------------------------------


class TestGroupElements:
    def test_order(self):
        for p, q in [(2, 0), (2, 1), (3, 2)]:
            assert len(group_elements(p, q)) == factorial(p) * factorial(q)

    def test_compose_inverse_identity(self):
        g = ProductGroupElement((1, 2, 0), (1, 0))
        e = ProductGroupElement.identity(3, 2)
        assert g.compose(g.inverse()) == e
        assert g.inverse().compose(g) == e
        assert e.is_identity and not g.is_identity

    def test_compose_matches_combined(self):
        g = ProductGroupElement((1, 0, 2), (1, 0))
        h = ProductGroupElement((2, 0, 1), (0, 1))
        gh = g.compose(h)
        comb = tuple(g.combined()[h.combined()[k]] for k in range(5))
        assert gh.combined() == comb

    def test_not_a_permutation_raises(self):
        with pytest.raises(ValueError):
            ProductGroupElement((0, 0), ())

    def test_class_key_conjugation_invariant(self):
        elems = group_elements(3, 2)
        h = ProductGroupElement((1, 2, 0), (1, 0))
        for g in elems[:10]:
            conj = g.compose(h).compose(g.inverse())
            assert conj.class_key() == h.class_key()

    def test_class_count(self):
        for p, q in [(2, 0), (2, 1), (3, 2)]:
            want = len(enumerate_partitions(p)) * len(enumerate_partitions(q))
            assert len(group_conjugacy_classes(p, q)) == want

    def test_classes_partition_the_group(self):
        classes = group_conjugacy_classes(3, 1)
        seen = [g for cls in classes for g in cls]
        assert len(seen) == len(set(seen)) == 6


# -- the theta action -----------------------------------------------------------


class TestThetaAction:
    def test_leg_unitary_matches_permutation_matrix(self):
        sp = ModelSpace(2, 2, 1)
        g = ProductGroupElement((1, 0), (0,))
        assert np.allclose(leg_unitary(sp, g), leg_perm_dense(sp, g.combined()))

    def test_leg_unitary_shape_mismatch(self):
        with pytest.raises(ValueError):
            leg_unitary(ModelSpace(2, 2, 1), ProductGroupElement((1, 0), ()))

    def test_group_action(self):
        sp = ModelSpace(2, 2, 0)
        a = rand_mat(sp.dim)
        g = ProductGroupElement((1, 0), ())
        h = ProductGroupElement((1, 0), ())
        lhs = theta_apply(sp, g, theta_apply(sp, h, a))
        rhs = theta_apply(sp, g.compose(h), a)
        assert np.allclose(lhs, rhs, atol=1e-12)

    def test_multiplicative(self):
        sp = ModelSpace(2, 2, 0)
        a, b = rand_mat(sp.dim), rand_mat(sp.dim)
        g = ProductGroupElement((1, 0), ())
        lhs = theta_apply(sp, g, a @ b)
        rhs = theta_apply(sp, g, a) @ theta_apply(sp, g, b)
        assert np.allclose(lhs, rhs, atol=1e-10)


# -- crossed operator algebra -----------------------------------------------------


class TestCrossedAlgebra:
    SP = ModelSpace(2, 2, 0)

    def test_block_validation(self):
        with pytest.raises(ValueError):
            CrossedOperator(self.SP, {ProductGroupElement((1, 0), ()): np.eye(3)})
        with pytest.raises(ValueError):
            CrossedOperator(self.SP, {ProductGroupElement((0,), ()): np.eye(16)})

    def test_zero_blocks_dropped(self):
        op = CrossedOperator(self.SP, {ProductGroupElement.identity(2, 0): np.zeros((16, 16))})
        assert op.blocks == {}
        assert op.max_block_norm() == 0.0

    def test_shift_homomorphism(self):
        g = ProductGroupElement((1, 0), ())
        h = ProductGroupElement((1, 0), ())
        lhs = CrossedOperator.shift(self.SP, g) @ CrossedOperator.shift(self.SP, h)
        rhs = CrossedOperator.shift(self.SP, g.compose(h))
        assert (lhs - rhs).max_block_norm() < 1e-12

    def test_shift_unitary(self):
        g = ProductGroupElement((1, 0), ())
        lam = CrossedOperator.shift(self.SP, g)
        ident = CrossedOperator.embed(self.SP, np.eye(16))
        assert (lam.adjoint() @ lam - ident).max_block_norm() < 1e-12

    def test_covariance_relation(self):
        # lambda_g Pi(a) lambda_g* = Pi(theta_g(a))
        a = rand_mat(16)
        g = ProductGroupElement((1, 0), ())
        lam = CrossedOperator.shift(self.SP, g)
        lhs = lam @ CrossedOperator.embed(self.SP, a) @ lam.adjoint()
        rhs = CrossedOperator.embed(self.SP, theta_apply(self.SP, g, a))
        assert (lhs - rhs).max_block_norm() < 1e-10

    def test_embed_is_homomorphism(self):
        a, b = rand_mat(16), rand_mat(16)
        lhs = crossed_multiply(
            CrossedOperator.embed(self.SP, a), CrossedOperator.embed(self.SP, b)
        )
        rhs = CrossedOperator.embed(self.SP, a @ b)
        assert (lhs - rhs).max_block_norm() < 1e-10

    def test_space_mismatch(self):
        other = CrossedOperator.embed(ModelSpace(2, 1, 1), np.eye(16))
        mine = CrossedOperator.embed(self.SP, np.eye(16))
        with pytest.raises(ValueError):
            mine @ other

    def test_linear_ops(self):
        x = rand_crossed(self.SP)
        y = rand_crossed(self.SP)
        assert ((x + y) - y - x).max_block_norm() < 1e-12
        assert (2.0 * x - x.scale(2.0)).max_block_norm() == 0.0
        assert (x * 0.0).max_block_norm() == 0.0


class TestDenseRepresentation:
    SP = ModelSpace(2, 2, 0)

    def test_multiplicative(self):
        rng = np.random.default_rng(31)
        for _ in range(4):
            x = rand_crossed(self.SP, rng)
            y = rand_crossed(self.SP, rng)
            lhs = (x @ y).to_dense_l2()
            rhs = x.to_dense_l2() @ y.to_dense_l2()
            assert np.abs(lhs - rhs).max() < 1e-10

    def test_adjoint(self):
        x = rand_crossed(self.SP)
        assert np.abs(x.adjoint().to_dense_l2() - x.to_dense_l2().conj().T).max() < 1e-10

    def test_additive(self):
        x, y = rand_crossed(self.SP), rand_crossed(self.SP)
        assert np.abs((x + y).to_dense_l2() - x.to_dense_l2() - y.to_dense_l2()).max() < 1e-12

    def test_faithful(self):
        x = rand_crossed(self.SP)
        assert np.abs(x.to_dense_l2()).max() > 0
        assert np.abs(CrossedOperator.zero(self.SP).to_dense_l2()).max() == 0.0

    def test_tau_hat_is_dense_trace(self):
        x = rand_crossed(self.SP)
        dense = x.to_dense_l2()
        assert tau_hat(x) == pytest.approx(np.trace(dense) / dense.shape[0])

    def test_tau_hat_tracial(self):
        rng = np.random.default_rng(77)
        for _ in range(4):
            x = rand_crossed(self.SP, rng)
            y = rand_crossed(self.SP, rng)
            assert tau_hat(x @ y) == pytest.approx(tau_hat(y @ x), abs=1e-10)

    def test_tau_hat_positive_definite(self):
        x = rand_crossed(self.SP)
        val = tau_hat(x.adjoint() @ x)
        assert val.imag == pytest.approx(0.0, abs=1e-12)
        assert val.real > 1e-8

    def test_cap(self):
        sp = ModelSpace(3, 2, 2)
        with pytest.raises(CapExceededError):
            CrossedOperator.embed(sp, np.eye(sp.dim)).to_dense_l2()


# -- center -------------------------------------------------------------------------


class TestCenter:
    def test_trivial_group(self):
        basis, witnesses = center_basis(ModelSpace(2, 1, 1))
        assert basis.dim == len(witnesses) == 1

    def test_two_leg_center(self):
        sp = ModelSpace(2, 2, 0)
        basis, witnesses = center_basis(sp)
        assert basis.dim == len(witnesses) == 2
        # identity-class witness is the fiberwise identity
        ident = CrossedOperator.embed(sp, np.eye(sp.dim))
        assert (witnesses[0] - ident).max_block_norm() < 1e-12
        # the other carries the swap unitary on the swap shift
        swap = ProductGroupElement((1, 0), ())
        blk = witnesses[1].blocks[(swap.s, swap.t)]
        assert np.allclose(blk, leg_perm_dense(sp, swap.combined()))

    def test_witnesses_commute_with_samples(self):
        sp = ModelSpace(2, 2, 0)
        _, witnesses = center_basis(sp)
        g = ProductGroupElement((1, 0), ())
        probes = [
            CrossedOperator.embed(sp, rand_mat(sp.dim)),
            CrossedOperator.shift(sp, g),
            rand_crossed(sp),
        ]
        for w in witnesses:
            for x in probes:
                assert (w @ x - x @ w).max_block_norm() < 1e-8

    def test_class_counts_drive_dimension(self):
        basis, _ = center_basis(ModelSpace(2, 2, 1))
        assert basis.dim == len(group_conjugacy_classes(2, 1)) == 2

    def test_cap(self):
        with pytest.raises(CapExceededError):
            center_basis(ModelSpace(3, 2, 2))


class TestCompression:
    def test_two_leg_values(self):
        rep = compression_check(ModelSpace(2, 2, 0), samples=12)
        assert rep.passed
        assert rep.fixed_dim_span == rep.fixed_dim_commutant == 136
        assert max(rep.projection_defect, rep.shift_defect, rep.average_defect) <= 1e-10

    def test_trivial_group_projection_is_identity(self):
        rep = compression_check(ModelSpace(2, 1, 1), samples=6)
        assert rep.passed
        assert rep.fixed_dim_span == rep.fixed_dim_commutant == 256
        assert rep.projection_defect <= 1e-12

    def test_cap(self):
        with pytest.raises(CapExceededError):
            compression_check(ModelSpace(3, 2, 2))


# -- complementary trace table ---------------------------------------------------------


class TestTauPrime:
    def test_weight_two_values(self):
        lam = Partition((2,))
        mu = Partition(())
        vals = trace_tau_prime(lam, mu)
        assert vals.from_delta_trace == Fraction(1, 2)
        assert vals.dim_linear == Fraction(1, 2)

    def test_hook_partition_disagreement(self):
        vals = trace_tau_prime(Partition((2, 1)), Partition(()))
        assert vals.from_delta_trace == Fraction(2, 3)
        assert vals.dim_linear == Fraction(1, 3)

    def test_mixed_weights(self):
        vals = trace_tau_prime(Partition((2, 1)), Partition((1, 1)))
        # dims 2 and 1, order 3! * 2! = 12
        assert vals.from_delta_trace == Fraction(4, 12)
        assert vals.dim_linear == Fraction(2, 12)

    def test_table_rows_and_classes(self):
        rows = tau_prime_table(3, 0)
        assert len(rows) == 3
        by_lam = {r.lam.parts: r for r in rows}
        assert by_lam[(3,)].equiv_class == by_lam[(1, 1, 1)].equiv_class
        assert by_lam[(2, 1)].equiv_class != by_lam[(3,)].equiv_class
        assert by_lam[(2, 1)].tau_delta_trace != by_lam[(2, 1)].tau_dim_linear

    def test_class_matches_criterion(self):
        rows = tau_prime_table(3, 2)
        assert len(rows) == 3 * 2
        for a in rows:
            for b in rows:
                same = a.equiv_class == b.equiv_class
                assert same == equivalence_criterion(a.lam, a.mu, b.lam, b.mu)

    def test_criterion_weight_mismatch(self):
        with pytest.raises(ValueError):
            equivalence_criterion(
                Partition((2,)), Partition(()), Partition((3,)), Partition(())
            )


class TestTraceInequality:
    def test_identity_rejected(self):
        with pytest.raises(ValueError):
            trace_inequality_check(
                ProductGroupElement.identity(2, 0), [[np.eye(2)] * 2], 2
            )

    def test_transposition_equality_at_identity(self):
        s = ProductGroupElement((1, 0), ())
        rep = trace_inequality_check(s, [[np.eye(2), np.eye(2)]], 2)
        assert rep.max_abs_trace == pytest.approx(0.5)
        assert rep.equality_attained and rep.all_within

    def test_three_cycle_value(self):
        s = ProductGroupElement((1, 2, 0), ())
        rep = trace_inequality_check(s, [[np.eye(2)] * 3], 2)
        assert rep.max_abs_trace == pytest.approx(0.25)
        assert not rep.equality_attained

    def test_orthogonal_pair_vanishes(self):
        s = ProductGroupElement((1, 0), ())
        rep = trace_inequality_check(s, [[np.diag([1.0, -1.0]), np.eye(2)]], 2)
        assert rep.max_abs_trace == 0.0

    def test_haar_samples_within_bound(self):
        rng = np.random.default_rng(404)
        s = ProductGroupElement((1, 0), (0,))
        tuples = [[haar_unitary(2, rng) for _ in range(3)] for _ in range(50)]
        rep = trace_inequality_check(s, tuples, 2)
        assert rep.all_within
        assert rep.samples == 50

    def test_tuple_length_validated(self):
        s = ProductGroupElement((1, 0), ())
        with pytest.raises(ValueError):
            trace_inequality_check(s, [[np.eye(2)]], 2)
