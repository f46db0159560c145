"""Unit tests for configuration loading."""

import pytest

from qws.config import THREADS_ENV, AnalysisConfig, load_config, parse_assignments
from qws.errors import ConfigError


class TestAnalysisConfig:
    def test_defaults(self):
        cfg = AnalysisConfig()
        assert cfg.fidelity_tol == 1e-8
        assert cfg.hamiltonian == "adjacency"
        assert cfg.to_dict()["workers"] == 1

    @pytest.mark.parametrize(
        "field,value",
        [
            ("fidelity_tol", 0.0),
            ("cluster_tol", 0.5),
            ("hamiltonian", "normalized"),
            ("t_max", 0.0),
            ("samples", 5),
            ("workers", 0),
            ("max_denominator", 0),
            ("seed", -1),
        ],
    )
    def test_validation(self, field, value):
        with pytest.raises(ConfigError, match=field):
            AnalysisConfig(**{field: value})

    def test_overrides_accept_aliases_and_strings(self):
        cfg = AnalysisConfig().with_overrides({"fidelity": "1e-10", "samples": "500", "hamiltonian": "laplacian"})
        assert cfg.fidelity_tol == 1e-10
        assert cfg.samples == 500
        assert cfg.hamiltonian == "laplacian"

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="Unknown configuration key"):
            AnalysisConfig().with_overrides({"colour": "red"})

    def test_bad_value(self):
        with pytest.raises(ConfigError, match="Invalid value for samples"):
            AnalysisConfig().with_overrides({"samples": "many"})


class TestLoadConfig:
    def test_parse_assignments(self):
        assert parse_assignments(["fidelity = 1e-9", "scan=1e-5"]) == {"fidelity": "1e-9", "scan": "1e-5"}
        assert parse_assignments(None) == {}
        with pytest.raises(ConfigError, match="name=value"):
            parse_assignments(["fidelity"])

    def test_file_then_environment_then_overrides(self, tmp_path):
        path = tmp_path / "qws.toml"
        path.write_text("[qws]\nt_max = 12.5\nworkers = 2\nfidelity_tol = 1e-9\n", encoding="utf-8")
        cfg = load_config(path, environ={})
        assert (cfg.t_max, cfg.workers, cfg.fidelity_tol) == (12.5, 2, 1e-9)
        cfg = load_config(path, environ={THREADS_ENV: "4"})
        assert cfg.workers == 4
        cfg = load_config(path, overrides={"workers": 3}, environ={THREADS_ENV: "4"})
        assert cfg.workers == 3

    def test_top_level_table(self, tmp_path):
        path = tmp_path / "flat.toml"
        path.write_text('hamiltonian = "signless"\n', encoding="utf-8")
        assert load_config(path, environ={}).hamiltonian == "signless"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "absent.toml", environ={})

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("t_max = = 3\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="Failed to parse"):
            load_config(path, environ={})
