import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ruzsa.errors import DomainError, ValidationError
from ruzsa.groups import (
    GroupSpec,
    IntegerMatrix,
    add,
    apply_integer_matrix,
    difference_set,
    identity,
    is_unimodular,
    negate,
    random_unimodular,
    restricted_sumset,
    scalar_mul,
    sumset,
)

Z = GroupSpec.cyclic


class TestArithmetic:
    def test_cyclic_add(self):
        assert add(Z(4), 3, 2) == 1

    def test_product_add(self):
        assert add(GroupSpec.finite(2, 3), (1, 2), (1, 2)) == (0, 1)

    def test_circle_add_wraps(self):
        assert math.isclose(add(GroupSpec.circle(), 3 * math.pi / 2, math.pi), math.pi / 2)

    @pytest.mark.parametrize("m,a,x,expected", [(5, 3, 2, 1), (4, -1, 3, 1), (6, 0, 5, 0)])
    def test_scalar_mul(self, m, a, x, expected):
        assert scalar_mul(Z(m), a, x) == expected

    def test_out_of_range_element(self):
        with pytest.raises(DomainError):
            add(Z(4), 4, 0)

    def test_bad_moduli(self):
        with pytest.raises(ValidationError):
            GroupSpec.finite(1)

    @pytest.mark.parametrize("moduli", [(2,), (7,), (2, 3), (4, 4), (64,), (2, 2, 2)])
    def test_group_axioms_exhaustive(self, moduli):
        g = GroupSpec.finite(*moduli)
        els = g.elements()
        e = identity(g)
        for x in els:
            assert add(g, x, e) == x
            assert add(g, x, negate(g, x)) == e
        sample = els if g.order <= 8 else els[:: max(1, g.order // 8)]
        for x, y, z in itertools.product(sample, repeat=3):
            assert add(g, x, y) == add(g, y, x)
            assert add(g, add(g, x, y), z) == add(g, x, add(g, y, z))

    @given(st.lists(st.integers(2, 6), min_size=1, max_size=3), st.data())
    def test_index_roundtrip(self, moduli, data):
        g = GroupSpec.finite(*moduli)
        i = data.draw(st.integers(0, g.order - 1))
        assert g.index(g.element(i)) == i

    @given(st.integers(2, 30), st.integers(-5, 5), st.integers(-5, 5), st.data())
    def test_combine_indices_matches_elementwise(self, m, a, b, data):
        g = Z(m)
        x, y = data.draw(st.integers(0, m - 1)), data.draw(st.integers(0, m - 1))
        got = int(g.combine_indices([(a, [x]), (b, [y])])[0])
        assert got == add(g, scalar_mul(g, a, x), scalar_mul(g, b, y))

    def test_json_roundtrip(self):
        for g in (Z(6), GroupSpec.finite(2, 3), GroupSpec.real(3), GroupSpec.circle()):
            assert GroupSpec.from_json(g.to_json()) == g


class TestIntegerMatrices:
    def test_shear_maps_y_z_to_y_minus_z(self):
        A = IntegerMatrix(((1, 0), (1, -1)))
        g = Z(5)
        for y, z in itertools.product(range(5), repeat=2):
            assert apply_integer_matrix(A, (y, z), g) == (y, (y - z) % 5)

    def test_identity_fixes(self):
        assert apply_integer_matrix(IntegerMatrix.identity(2), (3, 4), Z(7)) == (3, 4)

    def test_product_group_components(self):
        A = IntegerMatrix(((2, 1), (1, 1)))
        g = GroupSpec.finite(3, 3)
        # x1 = (1, 0), x2 = (0, 0): A x = (2 x1 + x2, x1 + x2)
        assert apply_integer_matrix(A, ((1, 0), (0, 0)), g) == ((2, 0), (1, 0))

    @pytest.mark.parametrize("entries,expected", [
        (((1, 0), (1, -1)), True), (((2, 0), (0, 1)), False), (((1, 0), (0, 1)), True)])
    def test_is_unimodular(self, entries, expected):
        assert is_unimodular(IntegerMatrix(entries)) is expected

    def test_det_exact_against_numpy(self, rng):
        for _ in range(50):
            a = rng.integers(-5, 6, size=(4, 4))
            assert IntegerMatrix(tuple(map(tuple, a.tolist()))).det() == round(np.linalg.det(a))

    def test_random_unimodular_inverse(self, rng):
        for n in (1, 2, 3, 4):
            A = random_unimodular(n, rng)
            assert is_unimodular(A)
            assert A @ A.inverse() == IntegerMatrix.identity(n)

    def test_non_integer_rejected(self):
        with pytest.raises(ValidationError):
            IntegerMatrix(((1.5, 0), (0, 1)))

    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_unimodular_action_is_bijection(self, m, rng):
        g = Z(m)
        pairs = list(itertools.product(range(m), repeat=2))
        for _ in range(5):
            A = random_unimodular(2, rng)
            assert len({apply_integer_matrix(A, p, g) for p in pairs}) == m * m


class TestSumsets:
    def test_small_sumsets(self):
        g = Z(4)
        assert sumset({0, 1}, {0, 1}, g) == {0, 1, 2}
        assert difference_set({0, 1}, {0, 1}, g) == {0, 1, 3}

    def test_triangle_example(self):
        g = Z(5)
        A, B, C = {0, 1}, {0, 2}, {0, 1}
        lhs = len(difference_set(A, C, g)) * len(B)
        rhs = len(difference_set(A, B, g)) * len(difference_set(B, C, g))
        assert (lhs, rhs) == (6, 16)

    def test_restricted_full_product_is_sumset(self):
        g = Z(7)
        A, B = {0, 2, 3}, {1, 5}
        assert restricted_sumset(A, B, itertools.product(A, B), g) == sumset(A, B, g)

    def test_restricted_rejects_outside_pairs(self):
        with pytest.raises(ValidationError):
            restricted_sumset({0}, {1}, [(2, 1)], Z(4))

    def test_empty_set_rejected(self):
        with pytest.raises(ValidationError):
            sumset(set(), {1}, Z(4))

    def test_set_triangle_random_triples(self, rng):
        for _ in range(10_000):
            m = int(rng.integers(2, 9))
            g = Z(m)
            A, B, C = (set(rng.choice(m, size=int(rng.integers(1, m + 1)), replace=False).tolist())
                       for _ in range(3))
            assert len(difference_set(A, C, g)) * len(B) <= \
                len(difference_set(A, B, g)) * len(difference_set(B, C, g))
