"""Exact linear algebra tests.

Plan:
 1) hand-checked row reductions, kernels, images, affine solves;
 2) canonical Subspace semantics (order-independent bases, membership,
    reduce_mod, quotient_dim preconditions);
 3) hypothesis property tests for the classical identities (rank-nullity,
    modular law dims, Fredholm witness, expressed_in factorization);
 4) zero-row / zero-column edge shapes.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from formalpde.ratlin import (
    AffineSolution,
    RatMatrix,
    Subspace,
    expressed_in,
    image,
    kernel,
    preimage,
    rref,
    solve,
    solve_affine,
)

F = Fraction


# --------------------------- 1) hand checks ---------------------------


def test_rref_hand_case():
    # [[2,4],[1,2]]: row1 scaled to [1,2], row2 eliminated.
    r, pivots = rref(RatMatrix([[2, 4], [1, 2]]))
    assert r == RatMatrix([[1, 2], [0, 0]])
    assert pivots == (0,)


def test_rref_pivot_rule_prefers_first_nonzero_row():
    # column 0 is zero, so the leftmost pivot column is 1; the first nonzero
    # row there is row 0 after the zero check, giving a fully reduced form.
    r, pivots = rref(RatMatrix([[0, 0, 3], [0, 2, 1]]))
    assert pivots == (1, 2)
    assert r == RatMatrix([[0, 1, 0], [0, 0, 1]])


def test_rref_idempotent_and_rank():
    m = RatMatrix([[1, 2, 3], [4, 5, 6], [7, 8, 9]])
    r, pivots = rref(m)
    assert m.rank() == 2 and pivots == (0, 1)
    assert rref(r)[0] == r


def test_kernel_hand_case():
    # x + y = 0, y + z = 0  =>  span{(1,-1,1)}
    k = kernel(RatMatrix([[1, 1, 0], [0, 1, 1]]))
    assert k.dim == 1
    assert k.contains_vector([1, -1, 1])
    assert not k.contains_vector([1, 0, 0])


def test_image_hand_case():
    im = image(RatMatrix([[1, 2], [2, 4], [0, 0]]))
    assert im.dim == 1
    assert im.contains_vector([1, 2, 0])


def test_solve_feasible():
    a = RatMatrix([[1, 1], [0, 1]])
    x = solve(a, [3, 1])
    assert x is not None and a.apply(x) == (F(3), F(1))


def test_solve_affine_infeasible_has_fredholm_witness():
    # Second equation reads 0 = 1: infeasibility is a value with certificate.
    a = RatMatrix([[1, 0], [0, 0]])
    sol = solve_affine(a, [1, 1])
    assert isinstance(sol, AffineSolution) and not sol.feasible
    y = sol.witness
    assert y is not None
    assert all(v == 0 for v in a.transpose().apply(y))
    assert sum(yi * bi for yi, bi in zip(y, [F(1), F(1)])) != 0


def test_solve_affine_feasible_carries_kernel():
    a = RatMatrix([[1, 1]])
    sol = solve_affine(a, [2])
    assert sol.feasible and sol.witness is None
    assert a.apply(sol.particular) == (F(2),)
    assert sol.kernel.dim == 1 and sol.kernel.contains_vector([1, -1])


# --------------------------- 2) subspace semantics ---------------------------


def test_subspace_canonical_basis_is_order_independent():
    v1, v2 = [1, 2, 3], [0, 1, 1]
    a = Subspace.from_spanning(3, [v1, v2])
    b = Subspace.from_spanning(3, [v2, v1])
    c = Subspace.from_spanning(3, [v1, [1, 3, 4], v2])  # redundant spanning set
    assert a == b == c
    assert a.basis == b.basis == c.basis
    # column-echelon: pivot entries are 1, other basis columns vanish there
    for j, p in enumerate(a.pivots):
        assert a.basis[p, j] == 1
        for l in range(a.dim):
            if l != j:
                assert a.basis[p, l] == 0


def test_reduce_mod_and_coords():
    u = Subspace.from_spanning(3, [[1, 0, 1], [0, 1, 1]])
    v = [2, 3, 5]
    assert u.contains_vector(v)
    coords = u.coords_of(v)
    assert coords is not None
    rebuilt = u.basis.apply(coords)
    assert rebuilt == (F(2), F(3), F(5))
    w = [0, 0, 1]
    red = u.reduce_mod(w)
    assert any(red)
    assert u.reduce_mod(red) == red  # idempotent
    assert u.coords_of(w) is None


def test_sum_intersect_hand_case():
    u = Subspace.from_spanning(3, [[1, 0, 0], [0, 1, 0]])
    v = Subspace.from_spanning(3, [[0, 1, 0], [0, 0, 1]])
    w = u.intersect(v)
    assert w.dim == 1 and w.contains_vector([0, 1, 0])
    assert (u + v).dim == 3


def test_quotient_dim_checks_containment():
    big = Subspace.full(2)
    small = Subspace.from_spanning(2, [[1, 0]])
    assert big.quotient_dim(small) == 1
    other = Subspace.from_spanning(3, [[1, 0, 0]])
    with pytest.raises(ValueError):
        small.quotient_dim(Subspace.from_spanning(2, [[0, 1]]).sum(small))
    with pytest.raises(ValueError):
        big.quotient_dim(other)  # ambient mismatch


def test_constraint_matrix_cuts_out_the_subspace():
    u = Subspace.from_spanning(4, [[1, 1, 0, 0], [0, 0, 1, -1]])
    q = u.constraint_matrix()
    assert kernel(q) == u


def test_preimage_hand_case():
    m = RatMatrix([[1, 0], [0, 1], [0, 0]])
    tgt = Subspace.from_spanning(3, [[1, 0, 0]])
    pre = preimage(m, tgt)
    assert pre.dim == 1 and pre.contains_vector([1, 0])


def test_expressed_in_raises_when_image_escapes():
    m = RatMatrix.identity(2)
    src = Subspace.from_spanning(2, [[1, 1]])
    tgt = Subspace.from_spanning(2, [[1, 0]])
    with pytest.raises(ValueError):
        expressed_in(m, src, tgt)


# --------------------------- 3) property tests ---------------------------

small_entries = st.integers(min_value=-4, max_value=4)


def matrices(max_rows=5, max_cols=5):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(
                st.lists(small_entries, min_size=c, max_size=c),
                min_size=r,
                max_size=r,
            ).map(RatMatrix)
        )
    )


@settings(deadline=None, max_examples=60)
@given(matrices())
def test_rank_nullity_and_kernel_annihilation(m):
    k = kernel(m)
    assert m.rank() + k.dim == m.cols
    for col in k.basis_columns():
        assert all(x == 0 for x in m.apply(col))
    assert image(m).dim == m.rank()


@settings(deadline=None, max_examples=60)
@given(matrices(4, 4), st.lists(small_entries, min_size=4, max_size=4))
def test_solve_affine_certificates(m, x):
    x = x[: m.cols]
    while len(x) < m.cols:
        x.append(0)
    b = m.apply(x)
    sol = solve_affine(m, b)
    assert sol.feasible
    assert m.apply(sol.particular) == tuple(b)
    # perturb b outside the image when the image is proper
    im = image(m)
    if im.dim < m.rows:
        for j in range(m.rows):
            e = [0] * m.rows
            e[j] = 1
            if not im.contains_vector(e):
                bad = [bi + ei for bi, ei in zip(b, e)]
                s2 = solve_affine(m, bad)
                assert not s2.feasible
                y = s2.witness
                assert all(v == 0 for v in m.transpose().apply(y))
                assert sum(yi * vi for yi, vi in zip(y, bad)) != 0
                break


def matrix_pairs_same_rows(max_rows=4, max_cols=3):
    def build(r):
        one = st.integers(1, max_cols).flatmap(
            lambda c: st.lists(
                st.lists(small_entries, min_size=c, max_size=c),
                min_size=r,
                max_size=r,
            ).map(RatMatrix)
        )
        return st.tuples(one, one)

    return st.integers(1, max_rows).flatmap(build)


@settings(deadline=None, max_examples=40)
@given(matrix_pairs_same_rows())
def test_modular_dimension_law(pair):
    a, b = pair
    u = image(a)
    v = image(b)
    assert (u + v).dim + u.intersect(v).dim == u.dim + v.dim
    assert (u + v).contains(u) and u.contains(u.intersect(v))


@settings(deadline=None, max_examples=40)
@given(matrices(4, 4))
def test_expressed_in_factors_through_bases(m):
    src = Subspace.full(m.cols)
    tgt = image(m) + Subspace.zero(m.rows)
    r = expressed_in(m, src, tgt)
    assert m @ src.basis == tgt.basis @ r


@settings(deadline=None, max_examples=40)
@given(matrix_pairs_same_rows(4, 4))
def test_preimage_property(pair):
    m, spanning = pair
    tgt = image(spanning)
    pre = preimage(m, tgt)
    for col in pre.basis_columns():
        assert tgt.contains_vector(m.apply(col))
    assert pre.contains(kernel(m))


# --------------------------- 4) degenerate shapes ---------------------------


def test_zero_shape_matrices():
    z = RatMatrix.zeros(0, 3)
    assert z.shape == (0, 3)
    assert kernel(z) == Subspace.full(3)
    assert image(z) == Subspace.zero(0)
    zc = RatMatrix.zeros(3, 0)
    assert kernel(zc) == Subspace.zero(0)
    assert image(zc) == Subspace.zero(3)
    assert (z @ zc).shape == (0, 0)
    prod = zc @ z
    assert prod.shape == (3, 3) and prod.is_zero()


def test_zero_ambient_subspace():
    s = Subspace.zero(0)
    assert s.dim == 0 and s == Subspace.full(0)


def test_matrix_immutability_and_hash():
    m = RatMatrix([[1, 2]])
    with pytest.raises(AttributeError):
        m.rows = 5
    assert hash(m) == hash(RatMatrix([[1, 2]]))
    assert m != RatMatrix([[1, 3]])
