"""Unit tests for periodicity, perfect state transfer and pretty good state transfer."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qws import graph, partition, spectral, transfer
from qws.config import AnalysisConfig
from qws.errors import PreconditionError
from qws.graph import Graph
from qws.transfer import PstCertificate, Reason, Refutation

from tests.strategies import simple_graphs


@pytest.fixture
def config():
    return AnalysisConfig()


def _brute_force_amplitudes(x, u, t_max=20.0, samples=40001):
    """Largest |H(t)_{v,u}| per vertex v over a uniform grid on (0, t_max]."""
    w, vecs = np.linalg.eigh(x.hamiltonian())
    grid = np.linspace(0.0, t_max, samples)[1:]
    amps = np.abs(vecs @ (vecs[u][:, None] * np.exp(1j * np.outer(w, grid))))
    amps[u] = 0.0
    return amps.max(axis=1)


class TestPeriodicity:
    @pytest.mark.parametrize(
        "x,period",
        [(graph.complete(2), math.pi), (graph.cube(3), math.pi), (graph.petersen(), 2 * math.pi)],
    )
    def test_graph_period(self, x, period):
        report = transfer.is_periodic_graph(x)
        assert report.periodic
        assert report.min_period == pytest.approx(period)

    def test_path_end_is_periodic_with_irrational_period(self):
        report = transfer.is_periodic_at(graph.path(3), 0)
        assert report.periodic
        assert report.min_period == pytest.approx(math.sqrt(2) * math.pi)
        assert report.eigenvalue_class.to_dict()["kind"] == "quadratic"

    @pytest.mark.parametrize("x", [graph.path(4), graph.cycle(5)])
    def test_not_periodic(self, x):
        report = transfer.is_periodic_graph(x)
        assert not report.periodic
        assert not report.ratio_condition_holds
        assert report.min_period is None

    def test_single_eigenvalue_support(self):
        report = transfer.is_periodic_at(graph.empty(2), 0)
        assert report.periodic
        assert report.min_period is None

    def test_lower_bounds(self):
        d = spectral.decompose(graph.path(2))
        zero, period = transfer.min_period_lower_bounds(d, range(d.m))
        assert zero == pytest.approx(math.pi / 2)
        assert period == pytest.approx(math.pi)
        assert transfer.min_period_lower_bounds(d, [0]) == (math.inf, math.inf)

    def test_ratio_condition(self):
        d = spectral.decompose(graph.cube(3))
        assert transfer.ratio_condition(d, range(d.m))
        d = spectral.decompose(graph.cycle(7))
        assert not transfer.ratio_condition(d, range(d.m))
        assert not transfer.ratio_condition(d, range(d.m), max_denominator=100)

    def test_ratio_condition_rejects_path_end(self):
        d = spectral.decompose(graph.path(4))
        support = spectral.vertex_support(d, 0)
        assert len(support) == 4
        assert not transfer.ratio_condition(d, support)

    @pytest.mark.parametrize("scale", [0.5, 1.0 / 3.0, math.sqrt(2)])
    def test_scaled_path_end_is_not_periodic(self, scale):
        x = Graph(graph.path(4).weights * scale)
        report = transfer.is_periodic_at(x, 0)
        assert not report.ratio_condition_holds
        assert not report.periodic
        assert report.min_period is None
        assert not report.inconsistent
        verdict = transfer.find_pst(x, 0)
        assert isinstance(verdict, Refutation)
        assert Reason.NOT_PERIODIC_AT_U in verdict.reasons

    def test_scaled_cycle_keeps_rational_ratios(self):
        # eigenvalues 1, 0, -1
        report = transfer.is_periodic_graph(Graph(graph.cycle(4).weights * 0.5))
        assert report.ratio_condition_holds
        assert report.periodic
        assert report.min_period == pytest.approx(2 * math.pi)


class TestFindPst:
    def test_k2(self, config):
        cert = transfer.find_pst(graph.complete(2), 0, config)
        assert isinstance(cert, PstCertificate)
        assert cert.v == 1
        assert cert.tau == pytest.approx(math.pi / 2)
        assert cert.gamma == pytest.approx(1j)
        assert cert.signs == (1, -1)

    def test_p3_ends(self, config):
        cert = transfer.find_pst(graph.path(3), 0, config)
        assert isinstance(cert, PstCertificate)
        assert cert.v == 2
        assert cert.tau == pytest.approx(math.pi / math.sqrt(2))
        assert cert.gamma == pytest.approx(-1)
        assert cert.reversed().u == 2

    def test_p4_is_refuted(self, config):
        verdict = transfer.find_pst(graph.path(4), 0, config)
        assert isinstance(verdict, Refutation)
        assert Reason.RATIO_CONDITION_FAILS in verdict.reasons
        assert "NotPeriodicAtU" in verdict.tags

    def test_middle_of_p3_has_no_partner(self, config):
        verdict = transfer.find_pst(graph.path(3), 1, config)
        assert isinstance(verdict, Refutation)

    def test_cube_antipodes(self, config):
        certs, refutations = transfer.find_all_pst(graph.cube(3), config)
        assert not refutations
        assert sorted((c.u, c.v) for c in certs) == [(0, 7), (1, 6), (2, 5), (3, 4)]
        assert all(c.tau == pytest.approx(math.pi / 2) for c in certs)

    def test_numeric_pst(self, config):
        cert = transfer.numeric_pst(graph.cube(3), 0, config)
        assert cert is not None and cert.v == 7
        assert transfer.numeric_pst(graph.path(4), 0, config) is None

    def test_laplacian_c4(self):
        cfg = AnalysisConfig(hamiltonian="laplacian")
        cert = transfer.find_pst(graph.cycle(4), 0, cfg)
        assert isinstance(cert, PstCertificate)
        assert cert.v == 2
        assert cert.tau == pytest.approx(math.pi / 2)

    @given(simple_graphs(2, 6))
    @settings(max_examples=25, deadline=None)
    def test_certificates_agree_with_oracle(self, x):
        certs, _ = transfer.find_all_pst(x)
        for cert in certs:
            u = spectral.transition_oracle(x, cert.tau)
            assert abs(u.entry(cert.v, cert.u) - cert.gamma) < 1e-6

    @given(simple_graphs(2, 6), st.data())
    @settings(max_examples=30, deadline=None)
    def test_verdict_agrees_with_brute_force_scan(self, x, data):
        u = data.draw(st.integers(0, x.n - 1))
        verdict = transfer.find_pst(x, u)
        best = _brute_force_amplitudes(x, u)
        if isinstance(verdict, Refutation):
            assert best.max() < 1 - 1e-6
        elif verdict.tau <= 20.0:
            assert best[verdict.v] > 1 - 1e-3

    @given(simple_graphs(2, 7))
    @settings(max_examples=30, deadline=None)
    def test_transfer_is_symmetric_with_a_unique_partner(self, x):
        d = spectral.decompose(x)
        certs, _ = transfer.find_all_pst(x, decomp=d)
        for cert in certs:
            back = transfer.find_pst(x, cert.v, decomp=d)
            assert isinstance(back, PstCertificate)
            assert back.v == cert.u
            assert back.tau == pytest.approx(cert.tau)
            assert back.gamma == pytest.approx(cert.gamma, abs=1e-6)
            col = np.abs(spectral.transition_column(d, cert.u, cert.tau))
            assert np.flatnonzero(col >= 1 - 1e-6).tolist() == [cert.v]
            assert abs(spectral.transition_column(d, cert.u, 2 * cert.tau)[cert.u]) >= 1 - 1e-7
            zero_bound, _ = transfer.min_period_lower_bounds(d, spectral.vertex_support(d, cert.u))
            assert cert.tau >= zero_bound - 1e-9

    @given(st.integers(0, 9))
    @settings(max_examples=10, deadline=None)
    def test_petersen_is_refuted_by_distance_partition(self, u):
        verdict = transfer.find_pst(graph.petersen(), u)
        assert isinstance(verdict, Refutation)
        assert Reason.DISTANCE_PARTITION_MISMATCH in verdict.reasons


class TestCheckPst:
    def test_p4_ends(self, config):
        verdict = transfer.check_pst(graph.path(4), 0, 3, config)
        assert isinstance(verdict, Refutation)
        assert "RatioConditionFails" in verdict.tags
        assert "ControllablePair" in verdict.tags

    def test_non_cospectral(self, config):
        verdict = transfer.check_pst(graph.path(4), 0, 1, config)
        assert isinstance(verdict, Refutation)
        assert Reason.NOT_COSPECTRAL in verdict.reasons

    def test_weighted_path(self, config):
        cert = transfer.check_pst(graph.weighted_path(3), 0, 3, config)
        assert isinstance(cert, PstCertificate)
        assert cert.tau == pytest.approx(math.pi / 2)

    def test_disconnected_pair(self, config):
        x = graph.disjoint_union(graph.path(2), graph.path(2))
        verdict = transfer.check_pst(x, 0, 2, config)
        assert verdict.tags == ["NumericFidelityBelowThreshold"]

    def test_same_vertex(self, config):
        with pytest.raises(PreconditionError):
            transfer.check_pst(graph.path(2), 0, 0, config)

    def test_build_certificate_at_wrong_time(self, config):
        d = spectral.decompose(graph.complete(2))
        assert transfer.build_certificate(d, 0, 1, 1.0, config) is None

    def test_quotient_transfer(self, config):
        x = graph.cube(3)
        cert = transfer.check_pst(x, 0, 7, config)
        assert isinstance(cert, PstCertificate)
        assert transfer.quotient_pst_check(x, partition.distance_partition(x, 0), cert, config)

    @given(st.data())
    @settings(max_examples=15, deadline=None)
    def test_petersen_pairs_fail_distance_partition(self, data):
        u = data.draw(st.integers(0, 9))
        v = data.draw(st.integers(0, 9).filter(lambda k: k != u))
        verdict = transfer.check_pst(graph.petersen(), u, v)
        assert isinstance(verdict, Refutation)
        assert Reason.DISTANCE_PARTITION_MISMATCH in verdict.reasons

    def test_filters(self):
        assert transfer.distance_partition_filter(graph.path(4), 0, 3)
        assert not transfer.distance_partition_filter(graph.cycle(6), 0, 2)
        assert transfer.stabilizer_filter(graph.cube(3), 0, 7)
        assert transfer.stabilizer_filter(graph.cube(5), 0, 31) is None


class TestPgst:
    def test_fibonacci_schedule(self):
        assert transfer.fibonacci_schedule(4) == pytest.approx(
            [math.pi, 17 * math.pi, 305 * math.pi, 5473 * math.pi]
        )

    def test_p4_end_to_end(self, config):
        schedule = transfer.fibonacci_schedule(4)
        result = transfer.pgst_search(graph.path(4), 0, 3, t_max=10.0, schedule=schedule, config=config)
        assert result.filter_passed
        assert result.best_fidelity >= 1 - 2e-6
        assert result.best_time >= 305 * math.pi - 1e-9
        assert len(result.schedule) == 4
        assert result.to_dict()["filter_passed"] is True

    def test_filter(self):
        d = spectral.decompose(graph.path(4))
        assert transfer.pgst_filter(d, 0, 3)
        assert transfer.pgst_filter(d, 1, 2)
        assert not transfer.pgst_filter(d, 0, 2)

    def test_sign_filter_blocks_non_cospectral_pair(self, config):
        result = transfer.pgst_search(graph.path(4), 0, 1, t_max=10.0, config=config)
        assert not result.filter_passed
        assert result.best_time is None
        assert result.best_fidelity <= 1.0

    def test_fidelity_curve(self):
        d = spectral.decompose(graph.complete(2))
        times, values = transfer.fidelity_curve(d, 0, 1, math.pi, 100)
        assert len(times) == 100
        assert np.allclose(values, np.sin(times) ** 2)

    def test_rejects_non_positive_horizon(self, config):
        with pytest.raises(PreconditionError):
            transfer.pgst_search(graph.path(4), 0, 3, t_max=0.0, config=config)
