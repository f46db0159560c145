"""Unit tests for products, joins and complements."""

import math

import numpy as np
import pytest

from qws import compose, graph, spectral, transfer
from qws.config import AnalysisConfig
from qws.errors import PreconditionError
from qws.transfer import PstCertificate


@pytest.fixture
def config():
    return AnalysisConfig()


def _cert(x, u, config):
    verdict = transfer.find_pst(x, u, config)
    assert isinstance(verdict, PstCertificate)
    return verdict


class TestProducts:
    def test_cartesian_transition_is_kronecker(self):
        x, y = graph.complete(2), graph.path(3)
        hx = spectral.transition(spectral.decompose(x), 0.8)
        hy = spectral.transition(spectral.decompose(y), 0.8)
        product = spectral.transition_oracle(graph.cartesian_product(x, y), 0.8)
        assert compose.cartesian_transition(hx, hy).distance(product) < 1e-9

    def test_cartesian_transition_needs_equal_times(self):
        d = spectral.decompose(graph.complete(2))
        with pytest.raises(PreconditionError, match="times differ"):
            compose.cartesian_transition(spectral.transition(d, 1.0), spectral.transition(d, 2.0))

    def test_power_pst_gives_cube(self, config):
        cert = _cert(graph.complete(2), 0, config)
        power = compose.power_pst(graph.complete(2), cert, 3, config)
        assert power is not None
        assert (power.u, power.v) == (0, 7)
        assert power.tau == pytest.approx(math.pi / 2)
        assert compose.power_pst(graph.complete(2), cert, 1, config) is cert
        with pytest.raises(PreconditionError):
            compose.power_pst(graph.complete(2), cert, 0, config)

    def test_direct_transition_matches_oracle(self):
        x, y = graph.complete(2), graph.cycle(3)
        h = compose.direct_transition(spectral.decompose(x), y, 1.1)
        assert h.distance(spectral.transition_oracle(graph.direct_product(x, y), 1.1)) < 1e-9

    def test_direct_odd_pst(self, config):
        y = graph.cube(2)
        cert = _cert(y, 0, config)
        product = compose.direct_odd_pst(graph.complete(2), y, cert, config=config)
        assert product is not None
        assert (product.u, product.v) == (0, 3)
        assert product.tau == pytest.approx(math.pi / 2)

    @pytest.mark.parametrize("x", [graph.path(3), graph.complete(3)])
    def test_direct_odd_pst_needs_odd_eigenvalues(self, x, config):
        y = graph.cube(2)
        with pytest.raises(PreconditionError, match="odd integer"):
            compose.direct_odd_pst(x, y, _cert(y, 0, config), config=config)


class TestJoins:
    def test_join_spectrum_reconstructs(self):
        x, y = graph.cycle(4), graph.empty(2)
        js = compose.join_spectrum(x, y)
        a = graph.join(x, y).hamiltonian()
        assert np.allclose(js.reconstruct(), a)
        assert js.identity_residual() < 1e-9
        assert js.eigenvalues() == pytest.approx(sorted(np.linalg.eigvalsh(a), reverse=True))
        assert js.mu1 + js.mu2 == pytest.approx(js.k + js.l)

    def test_join_transition(self):
        x, y = graph.complete(2), graph.cycle(5)
        js = compose.join_spectrum(x, y)
        oracle = spectral.transition_oracle(graph.join(x, y), 0.6)
        assert compose.join_transition(js, 0.6).distance(oracle) < 1e-9

    def test_join_spectrum_needs_regular_parts(self):
        with pytest.raises(PreconditionError, match="regular"):
            compose.join_spectrum(graph.path(3), graph.empty(1))

    def test_join_with_k1_kills_transfer(self, config):
        x = graph.complete(2)
        verdict = compose.join_pst_transport(x, _cert(x, 0, config), graph.complete(1), config)
        assert verdict.closed_form is False
        assert not verdict.has_pst
        assert verdict.agrees

    def test_lemma_search(self, config):
        hits = compose.join_lemma_search("k2", max_n=8, config=config)
        assert hits
        assert hits[0].certificate.tau == pytest.approx(math.pi / 2)
        assert math.isqrt(hits[0].discriminant) ** 2 == hits[0].discriminant
        with pytest.raises(PreconditionError):
            compose.join_lemma_search("k3", max_n=4)

    def test_lemma_search_four_regular(self, config):
        # sqrt(16 + 8n) is an integer first at n = 6; the only 4-regular circulant there is the octahedron
        (hit,) = compose.join_lemma_search("empty2", max_n=8, config=config, degree=4)
        assert hit.spec == "circulant:n=6;C=1,2,4,5"
        assert hit.degree == 4.0
        assert hit.discriminant == 64
        assert hit.certificate.tau == pytest.approx(math.pi / 2)
        assert (hit.certificate.u, hit.certificate.v) == (0, 1)
        assert compose.join_lemma_search("empty2", max_n=5, config=config, degree=4) == []


class TestComplements:
    def test_two_matchings(self, config):
        x = graph.disjoint_union(graph.complete(2), graph.complete(2))
        verdict = compose.complement_transport(x, _cert(x, 0, config), config)
        assert verdict.closed_form is True
        assert verdict.has_pst
        assert verdict.certificate.v == 1

    def test_octahedron_has_no_transfer(self, config):
        x = graph.disjoint_union(*[graph.complete(2)] * 3)
        verdict = compose.complement_transport(x, _cert(x, 0, config), config)
        assert verdict.closed_form is None
        assert not verdict.has_pst
        assert verdict.refutation is not None

    def test_needs_regular_graph(self, config):
        x = graph.path(3)
        with pytest.raises(PreconditionError, match="regular"):
            compose.complement_transport(x, _cert(x, 0, config), config)
