"""Unit tests for exact polynomial and walk-matrix arithmetic."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qws import exact, graph
from qws.errors import ExactArithmeticLimit, PreconditionError
from qws.exact import IntPolynomial

from tests.strategies import simple_graphs


def linear(root: int) -> IntPolynomial:
    return IntPolynomial([-root, 1])


class TestIntPolynomial:
    def test_normalizes_trailing_zeros(self):
        p = IntPolynomial([1, 2, 0, 0])
        assert p.degree == 1
        assert IntPolynomial([]).degree == -1
        assert IntPolynomial([0]).is_zero()

    def test_arithmetic_and_evaluation(self):
        p = linear(1) * linear(-1)
        assert p == IntPolynomial([-1, 0, 1])
        assert p(3) == 8
        assert (p - p).is_zero()
        assert p.shift(2) == IntPolynomial([0, 0, -1, 0, 1])
        assert 2 * p == IntPolynomial([-2, 0, 2])

    def test_str(self):
        assert str(IntPolynomial([0, -2, 0, 1])) == "-2 x + x^3"
        assert str(IntPolynomial([])) == "0"

    def test_gcd(self):
        a = linear(1) * linear(2) * linear(3)
        b = linear(2) * linear(3) * linear(5)
        assert a.gcd(b) == linear(2) * linear(3)
        assert linear(1).gcd(linear(2)) == 1

    def test_gcd_keeps_common_content(self):
        a = IntPolynomial([2, 2])
        b = IntPolynomial([4, 4]) * linear(7)
        assert a.gcd(b) == IntPolynomial([2, 2])

    def test_primitive_part(self):
        assert IntPolynomial([-4, -6]).primitive_part() == IntPolynomial([2, 3])

    def test_exact_div_rejects_remainder(self):
        with pytest.raises(ArithmeticError):
            IntPolynomial([3, 4]).exact_div(2)


class TestCharacteristicPolynomials:
    def test_path(self):
        assert exact.char_poly(graph.path(3)) == IntPolynomial([0, -2, 0, 1])
        assert exact.path_char_poly(3) == exact.char_poly(graph.path(3))
        assert exact.path_char_poly(0) == 1

    def test_cube(self):
        expected = linear(3) * linear(-3)
        for _ in range(3):
            expected = expected * linear(1)
        for _ in range(3):
            expected = expected * linear(-1)
        assert exact.char_poly(graph.cube(3)) == expected

    def test_laplacian_has_root_zero(self):
        phi = exact.char_poly(graph.petersen(), "laplacian")
        assert phi(0) == 0

    def test_vertex_deleted(self):
        assert exact.vertex_deleted_char_poly(graph.path(4), 0) == exact.path_char_poly(3)

    @given(st.integers(2, 20))
    @settings(max_examples=19, deadline=None)
    def test_path_recurrence(self, n):
        phi = exact.path_char_poly
        assert phi(n) == IntPolynomial.x() * phi(n - 1) - phi(n - 2)
        assert phi(n) == exact.char_poly(graph.path(n))

    @given(st.integers(1, 12), st.integers(1, 12))
    @settings(max_examples=40, deadline=None)
    def test_path_splits_at_an_edge(self, m, n):
        phi = exact.path_char_poly
        assert phi(m + n) == phi(m) * phi(n) - phi(m - 1) * phi(n - 1)

    @pytest.mark.parametrize("m,n,expected_degree", [(1, 3, 1), (2, 3, 0), (2, 5, 2), (3, 5, 1)])
    def test_path_gcd(self, m, n, expected_degree):
        assert exact.path_char_poly_gcd(m, n).degree == expected_degree

    def test_limits(self):
        with pytest.raises(ExactArithmeticLimit, match="integer weights"):
            exact.char_poly(graph.weighted_path(2))
        with pytest.raises(ExactArithmeticLimit, match="limited to 24"):
            exact.char_poly(graph.cube(5))


class TestWalkMatrices:
    def test_bareiss_rank(self):
        m = np.array([[1, 2], [2, 4]], dtype=object)
        assert exact.bareiss_rank(m) == 1
        assert exact.bareiss_rank(np.array([[0, 1], [1, 0]], dtype=object)) == 2

    @pytest.mark.parametrize(
        "x,u,rank",
        [(graph.path(4), 0, 4), (graph.cube(3), 0, 4), (graph.petersen(), 0, 3), (graph.complete(5), 2, 2)],
    )
    def test_walk_rank_is_support_size(self, x, u, rank):
        assert exact.walk_rank(x, u) == rank

    def test_controllable(self):
        assert exact.is_controllable(graph.path(5), 0)
        assert not exact.is_controllable(graph.path(5), 2)

    def test_walk_matrix_needs_vertices(self):
        with pytest.raises(PreconditionError):
            exact.walk_matrix(graph.path(3), [])

    @pytest.mark.parametrize("method", ["polynomial", "walk"])
    def test_cospectral(self, method):
        assert exact.are_cospectral(graph.path(4), 0, 3, method)
        assert not exact.are_cospectral(graph.path(4), 0, 1, method)
        assert exact.are_cospectral(graph.petersen(), 0, 7, method)

    @given(simple_graphs(2, 8), st.data())
    @settings(max_examples=30, deadline=None)
    def test_cospectral_methods_agree(self, x, data):
        u = data.draw(st.integers(0, x.n - 1))
        v = data.draw(st.integers(0, x.n - 1))
        assert exact.are_cospectral(x, u, v, "polynomial") == exact.are_cospectral(x, u, v, "walk")

    def test_unknown_method(self):
        with pytest.raises(ValueError, match="Unknown cospectrality"):
            exact.are_cospectral(graph.path(4), 0, 3, "spectrum")

    def test_poles(self):
        assert exact.poles_count(graph.path(4), 0) == 4
        assert exact.poles_count(graph.cube(3), 0) == 4

    def test_transfer_orthogonal_is_the_reflection_on_a_path(self):
        q = exact.transfer_orthogonal(graph.path(4), 0, 3)
        reflection = np.fliplr(np.eye(4, dtype=int))
        assert all(q[i, j] == Fraction(int(reflection[i, j])) for i in range(4) for j in range(4))

    def test_transfer_orthogonal_needs_controllable_vertices(self):
        with pytest.raises(PreconditionError, match="not controllable"):
            exact.transfer_orthogonal(graph.cube(3), 0, 7)


class TestSignChanges:
    @pytest.mark.parametrize(
        "values,count",
        [([1, -1, 1], 2), ([1, 0, -1], 1), ([1, 0, 1], 0), ([0.0, 0.0], 0), ([-2, -1, 3], 1)],
    )
    def test_sign_changes(self, values, count):
        assert exact.sign_changes(values) == count

    @given(st.integers(1, 12), st.data())
    @settings(max_examples=30, deadline=None)
    def test_path_eigenvector_sign_changes(self, n, data):
        # (φ(P_0)(θ), ..., φ(P_{n-1})(θ)) is an eigenvector of P_n for θ
        thetas = np.sort(np.linalg.eigvalsh(graph.path(n).hamiltonian()))[::-1]
        m = data.draw(st.integers(1, n))
        theta = float(thetas[m - 1])
        values = [exact.path_char_poly(r)(theta) for r in range(n)]
        assert exact.sign_changes(values) == m - 1
