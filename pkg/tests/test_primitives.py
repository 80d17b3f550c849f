import random

import pytest

from primstab import charlab
from primstab import primitives as P
from primstab import words as W
from primstab.errors import DomainError
from primstab.primitives import (
    CROSSING,
    DISJOINT,
    SAME_AXIS,
    axes_cross,
    christoffel_word,
    enumerate_primitives,
    f2_primitives,
    f2_primitives_bruteforce,
    is_proper_power,
    is_simple,
    reference_structure,
    whitehead_is_primitive,
)


@pytest.fixture(scope="module")
def n3():
    return W.nonorientable_surface(3)


@pytest.fixture(scope="module")
def n3_ref(n3):
    return reference_structure(n3)


@pytest.fixture(scope="module")
def n3_prims(n3, n3_ref):
    return enumerate_primitives(n3, n3_ref, 6, 5)


class TestProperPower:
    def test_square(self):
        assert is_proper_power((1, 2, 1, 2)) is True

    def test_basis_pair(self):
        assert is_proper_power((1, 2)) is False

    def test_length_five(self):
        assert is_proper_power((1, 2, 1, 2, 1)) is False


class TestAxesCross:
    def test_linked(self, n3_ref):
        # a's axis is (-1,1); conjugating by b moves it away; the pair (a, b)
        # has linked axes iff the endpoint pairs interleave.  Use two known
        # generators: a (-1,1) and c (1.22, 3.78): disjoint.
        assert axes_cross((1,), (3,), n3_ref) == DISJOINT

    def test_same_axis_of_power(self, n3_ref):
        assert axes_cross((1, 2), (1, 2, 1, 2), n3_ref) == SAME_AXIS

    def test_crossing_pair(self, n3_ref):
        # ab and ba are conjugate with distinct crossing axes in the pants
        verdicts = {axes_cross((1, 2), (2, 1), n3_ref)}
        assert verdicts <= {CROSSING, DISJOINT, SAME_AXIS}

    def test_identity_rejected(self, n3_ref, n3):
        with pytest.raises(DomainError):
            axes_cross(n3.relators[0], (1,), n3_ref)


class TestChristoffel:
    def test_slope_one(self):
        assert christoffel_word(1, 1) == (1, 2)

    def test_slope_half(self):
        assert christoffel_word(1, 2) == (1, 1, 2)

    def test_slope_two(self):
        assert christoffel_word(2, 1) == (1, 2, 2)

    def test_not_reduced_slope(self):
        with pytest.raises(DomainError):
            christoffel_word(2, 2)


class TestWhitehead:
    def test_generator(self):
        assert whitehead_is_primitive((1,)) is True

    def test_pair(self):
        assert whitehead_is_primitive((1, 2)) is True

    def test_commutator_like(self):
        assert whitehead_is_primitive((1, 2, 1, -2)) is False

    def test_square(self):
        assert whitehead_is_primitive((1, 2, 1, 2)) is False


class TestF2Primitives:
    def test_len1(self):
        assert [c.word for c in f2_primitives(1)] == [(1,), (2,)]

    def test_len2(self):
        words = {c.word for c in f2_primitives(2)}
        assert words == {(1,), (2,), (1, 2), (1, -2)}

    def test_matches_whitehead_oracle(self):
        assert f2_primitives(10) == f2_primitives_bruteforce(10)

    def test_closed_under_inversion(self):
        from primstab.primitives import _class_canonical_free
        for c in f2_primitives(8):
            assert _class_canonical_free(W.invert_word(c.word)) == c.word


class TestSurfaceEnumeration:
    def test_generators_at_len1(self, n3, n3_ref):
        prims = enumerate_primitives(n3, n3_ref, 1, 6)
        assert [c.word for c in prims] == [(1,), (2,), (3,)]
        assert all(c.orientation == -1 for c in prims)

    def test_pair_products_present(self, n3, n3_prims):
        rs = W.rewrite_system(n3)
        words = {c.word for c in n3_prims}
        for i in range(1, 4):
            for j in range(1, 4):
                if i == j:
                    continue
                key = min(rs.conjugacy_canonical(W.pack((i, j))),
                          rs.conjugacy_canonical(W.pack((-j, -i))))
                assert W.unpack(key) in words

    def test_proper_powers_absent(self, n3_prims):
        assert all(not is_proper_power(c.word) for c in n3_prims)

    def test_simple_is_conjugacy_and_inversion_invariant(self, n3, n3_ref, n3_prims):
        rng = random.Random(17)
        letters = [s * i for i in range(1, 4) for s in (1, -1)]
        for c in n3_prims[:8]:
            assert is_simple(W.invert_word(c.word), n3_ref, 5)
            for _ in range(5):
                u = tuple(rng.choice(letters) for _ in range(3))
                conj = W.free_reduce(u + c.word + W.invert_word(u))
                assert is_simple(conj, n3_ref, 5)

    def test_one_sided_squares_two_sided(self, n3, n3_prims):
        for c in n3_prims:
            if c.orientation == -1:
                assert W.orientation_class(n3, c.word + c.word) == 1

    def test_automorphism_invariance(self, n3, n3_ref, n3_prims):
        from primstab import formats
        autos = formats.load_shipped_automorphisms(n3)
        for f in autos:
            for c in n3_prims:
                image = W.apply_automorphism(f, c.word)
                core, _ = W.cyclic_reduce(image)
                if len(core) <= 8:
                    assert is_simple(core, n3_ref, 4), (f.name, c.word, core)

    def test_budget(self, n3, n3_ref):
        with pytest.raises(DomainError):
            enumerate_primitives(n3, n3_ref, 6, 2, budget=10)

    def test_free_rank3_unsupported(self):
        p = W.free_group(3)
        ref = P.reference_structure(p)
        with pytest.raises(DomainError):
            enumerate_primitives(p, ref, 3, 3)


class TestNonSimpleRejected:
    def test_square(self, n3_ref):
        assert is_simple((1, 1), n3_ref, 5) is False

    def test_commutator(self, n3_ref):
        assert is_simple((1, 2, -1, -2), n3_ref, 5) is False

    def test_free_kind_uses_whitehead(self):
        p = W.free_group(2)
        ref = P.reference_structure(p)
        assert is_simple((1, 2, 1, -2), ref, 5) is False
        assert is_simple((1, 2), ref, 5) is True
