"""Unit tests for cubelike graphs, circulants and their codes."""

import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings

from qws import cayley, graph, spectral, transfer
from qws.cayley import CirculantSpec, CubelikeSpec
from qws.errors import GraphError, GraphParseError
from qws.transfer import PstCertificate

from tests.strategies import circulant_specs, cubelike_specs


def _translation(n, c):
    p = np.zeros((n, n))
    p[np.arange(n), np.arange(n) ^ c] = 1.0
    return p


class TestSpecs:
    def test_cubelike_validation(self):
        assert CubelikeSpec(d=3, C=(4, 1, 2)).C == (1, 2, 4)
        with pytest.raises(GraphError, match="nonzero"):
            CubelikeSpec(d=2, C=(0, 1))
        with pytest.raises(GraphError, match="nonzero"):
            CubelikeSpec(d=2, C=(4,))
        with pytest.raises(GraphError, match="repeated"):
            CubelikeSpec(d=2, C=(1, 1))

    def test_circulant_validation(self):
        assert CirculantSpec(n=6, C=(5, 1, 7)).C == (1, 5)
        with pytest.raises(GraphError, match="negation"):
            CirculantSpec(n=5, C=(1,))
        with pytest.raises(GraphError, match="must not contain 0"):
            CirculantSpec(n=4, C=(0, 1, 3))

    def test_parse_and_format(self):
        spec = cayley.parse_cayley_spec("cubelike:d=3;C=100,010,001")
        assert spec == CubelikeSpec(d=3, C=(1, 2, 4))
        assert cayley.format_spec(spec) == "cubelike:d=3;C=001,010,100"
        circ = cayley.parse_cayley_spec("circulant:n=8;C=1,7")
        assert cayley.format_spec(circ) == "circulant:n=8;C=1,7"

    @pytest.mark.parametrize("text", ["cubelike:d=3;C=10", "wheel:n=5", "circulant:n=x;C=1"])
    def test_parse_errors(self, text):
        with pytest.raises(GraphParseError):
            cayley.parse_cayley_spec(text)

    def test_graphs(self):
        assert cayley.graph_from_spec_string("cubelike:d=3;C=001,010,100") == graph.cube(3)
        assert cayley.graph_from_spec_string("circulant:n=6;C=1,5") == graph.cycle(6)


class TestCodes:
    def test_cube_code_is_identity(self):
        code = CubelikeSpec(d=3, C=(1, 2, 4)).code()
        assert np.array_equal(code.matrix(), np.fliplr(np.eye(3, dtype=int)))
        assert not code.is_even()
        assert cayley.quarter_period_target(code) is None

    def test_simplex_code_is_doubly_even(self):
        code = CubelikeSpec(d=3, C=tuple(range(1, 8))).code()
        assert code.is_even()
        assert code.is_self_orthogonal()
        assert code.is_doubly_even()
        assert cayley.quarter_period_target(code) is None

    def test_quarter_period_search(self):
        spec = cayley.search_quarter_period_code(max_d=8, seed=0)
        assert spec is not None
        code = spec.code()
        assert code.is_even() and code.is_self_orthogonal() and not code.is_doubly_even()
        assert spec.sigma == 0


class TestCubelikePst:
    def test_cube_uses_sigma(self):
        verdict = cayley.cubelike_pst(CubelikeSpec(d=3, C=(1, 2, 4)))
        assert verdict.rule == "sigma"
        assert verdict.has_pst
        assert verdict.certificate.v == 7
        assert verdict.certificate.tau == pytest.approx(math.pi / 2)
        assert verdict.certificate.gamma == pytest.approx(-1j)
        assert verdict.numeric is True
        assert verdict.agrees

    def test_quarter_period_transfer(self):
        spec = cayley.search_quarter_period_code(max_d=8, seed=0)
        verdict = cayley.cubelike_pst(spec)
        assert verdict.rule == "quarter"
        assert verdict.has_pst
        assert verdict.certificate.tau == pytest.approx(math.pi / 4)
        assert verdict.certificate.v == spec.code().quarter_period_target()

    def test_eigenvalues_and_columns(self):
        spec = CubelikeSpec(d=3, C=(1, 6))
        x = cayley.cubelike_graph(spec)
        d = spectral.decompose(x)
        assert sorted(cayley.cubelike_eigenvalues(spec)) == pytest.approx(sorted(np.linalg.eigvalsh(x.hamiltonian())))
        for vertex in (0, 5):
            col = cayley.cubelike_transition_column(spec, 0.9, vertex)
            assert np.allclose(col, spectral.transition_column(d, vertex, 0.9))

    @pytest.mark.parametrize("d", [1, 3, 5])
    def test_walsh_hadamard_matches_sylvester_matrix(self, d):
        values = np.random.default_rng(d).normal(size=2**d)
        assert np.allclose(cayley.walsh_hadamard(values), scipy.linalg.hadamard(2**d) @ values)

    def test_walsh_hadamard_needs_power_of_two(self):
        with pytest.raises(GraphError, match="power-of-two"):
            cayley.walsh_hadamard(np.ones(6))

    def test_large_cube_from_characters(self):
        spec = CubelikeSpec(d=12, C=tuple(1 << k for k in range(12)))
        values = cayley.cubelike_eigenvalues(spec)
        assert values[0] == 12.0
        assert values[spec.n - 1] == -12.0
        col = cayley.cubelike_transition_column(spec, math.pi / 2)
        assert abs(col[spec.n - 1]) == pytest.approx(1.0)

    def test_translation(self):
        verdict = cayley.cubelike_pst(CubelikeSpec(d=2, C=(1, 2)))
        assert cayley.pst_translation(verdict.certificate, CubelikeSpec(d=2, C=(1, 2))) == 3

    @given(cubelike_specs())
    @settings(max_examples=30, deadline=None)
    def test_transition_at_half_and_quarter_periods(self, spec):
        d = spectral.decompose(cayley.cubelike_graph(spec))
        k = len(spec.C)
        assert np.allclose(spectral.transition(d, math.pi).U, (-1) ** k * np.eye(spec.n), atol=1e-9)
        product = np.eye(spec.n)
        for c in spec.C:
            product = product @ _translation(spec.n, c)
        assert np.array_equal(product, _translation(spec.n, spec.sigma))
        assert np.allclose(spectral.transition(d, math.pi / 2).U, 1j**k * product, atol=1e-9)

    @given(cubelike_specs())
    @settings(max_examples=30, deadline=None)
    def test_rule_follows_connection_set_sum(self, spec):
        verdict = cayley.cubelike_pst(spec)
        if spec.sigma:
            assert verdict.rule == "sigma"
            assert verdict.has_pst
            assert verdict.certificate.v == spec.sigma
            assert verdict.certificate.gamma == pytest.approx(1j ** len(spec.C))
        elif cayley.quarter_period_target(spec.code()) is None:
            assert verdict.rule == "numeric"

    @pytest.mark.parametrize("d", [2, 3])
    def test_zero_sum_without_quarter_code_falls_back(self, d):
        # d = 2 is K4, d = 3 is two copies of it
        spec = CubelikeSpec(d=d, C=(1, 2, 3))
        assert spec.sigma == 0
        code = spec.code()
        assert code.is_even()
        assert cayley.quarter_period_target(code) is None
        verdict = cayley.cubelike_pst(spec)
        assert verdict.rule == "numeric"
        assert not verdict.has_pst
        assert verdict.refutation is not None

    def test_fallback_code_is_not_self_orthogonal(self):
        code = CubelikeSpec(d=3, C=(1, 2, 3)).code()
        assert sorted(code.words()) == [0, 0b011, 0b101, 0b110]
        assert not code.is_self_orthogonal()

    def test_enumeration(self):
        assert sum(1 for _ in cayley.enumerate_cubelike(2)) == 7
        assert sum(1 for _ in cayley.enumerate_cubelike(2, dedup=True)) == 5


class TestCirculants:
    def test_order_classes(self):
        assert cayley.order_classes(6) == {1: (1, 5), 2: (2, 4), 3: (3,)}

    def test_integrality(self):
        assert cayley.circulant_is_integral(CirculantSpec(n=8, C=(1, 3, 5, 7)))
        assert not cayley.circulant_is_integral(CirculantSpec(n=8, C=(1, 7)))
        values = cayley.circulant_eigenvalues(CirculantSpec(n=6, C=(2, 4)))
        assert np.allclose(np.round(values), values)

    def test_c4_transfers_to_antipode(self):
        spec = CirculantSpec(n=4, C=(1, 3))
        verdict = cayley.circulant_pst_pair(spec)
        assert verdict.rule == "antipodal"
        assert verdict.has_pst
        assert cayley.pst_translation(verdict.certificate, spec) == 2

    @pytest.mark.parametrize("n,rule", [(5, "odd"), (6, "two-mod-four")])
    def test_closed_form_refutations(self, n, rule):
        verdict = cayley.circulant_pst_pair(CirculantSpec(n=n, C=(1, n - 1)))
        assert verdict.rule == rule
        assert not verdict.has_pst
        assert verdict.closed_form is False
        assert verdict.agrees

    @pytest.mark.parametrize("spec", [CirculantSpec(n=6, C=(3,)), CirculantSpec(n=2, C=(1,))])
    def test_disconnected_or_tiny_circulants_escape_two_mod_four(self, spec):
        verdict = cayley.circulant_pst_pair(spec)
        assert verdict.rule == "antipodal"
        assert verdict.has_pst
        assert verdict.certificate.v == spec.n // 2

    def test_c8_has_no_pst(self):
        verdict = cayley.cayley_analysis(CirculantSpec(n=8, C=(1, 7)), full=False)
        assert not verdict.has_pst
        assert verdict.refutation is not None

    @given(circulant_specs(odd=True))
    @settings(max_examples=20, deadline=None)
    def test_odd_circulants_have_no_pst(self, spec):
        certs, _ = transfer.find_all_pst(cayley.circulant_graph(spec))
        assert not certs
        verdict = cayley.circulant_pst_pair(spec)
        assert verdict.rule == "odd"
        assert not verdict.has_pst

    @given(circulant_specs(2, 12))
    @settings(max_examples=30, deadline=None)
    def test_transfer_on_circulants_needs_even_order(self, spec):
        verdict = transfer.find_pst(cayley.circulant_graph(spec), 0)
        if isinstance(verdict, PstCertificate):
            assert spec.n % 2 == 0
            assert verdict.v == spec.n // 2

    def test_enumeration(self):
        specs = list(cayley.enumerate_circulants(6))
        assert len(specs) == 7
        assert CirculantSpec(n=6, C=(3,)) in specs

    def test_circulant_graph(self):
        x = cayley.circulant_graph(CirculantSpec(n=8, C=(1, 4, 7)))
        assert x.regular_degree() == 3.0
        assert x.weights[0, 4] == 1.0
        assert x.weights[0, 2] == 0.0
