import json
import math

import numpy as np
import pytest

from cli.controllers.config_loader import load_config, parse_config
from cli.controllers.manifest import MANIFEST_NAME, finish_manifest, now
from cli.models.experiment import ExperimentConfig, NoiseValidationConfig, NormSpec, SolverConfig
from cli.models.results import RunManifest
from core import cache
from core.config import get_worker_count
from core.exceptions import (
    EXIT_FAILURE,
    EXIT_USAGE,
    ArtifactError,
    ConfigError,
    GateFailure,
    ParameterOutOfRange,
    UnresolvedSpectrum,
)
from core.storage import read_field, read_json, read_table, write_csv, write_field, write_json


class TestSettings:
    """Unit tests for settings helpers in core/config.py"""

    @pytest.mark.parametrize("requested,expected", [
        (3, 3),
        (1, 1),
    ])
    def test_explicit_worker_count(self, requested, expected):
        """Test that an explicit positive count is kept"""
        assert get_worker_count(requested) == expected

    def test_zero_means_every_core(self, mocker):
        """Test that 0 resolves to the logical core count"""
        mocker.patch("core.config.os.cpu_count", return_value=6)
        assert get_worker_count(0) == 6

    def test_default_from_settings(self, mocker):
        """Test that no argument falls back to settings.WORKERS"""
        mocker.patch("core.config.settings.WORKERS", 2)
        assert get_worker_count() == 2


class TestExceptions:
    """Unit tests for the error hierarchy"""

    @pytest.mark.parametrize("error,code", [
        (ConfigError, EXIT_USAGE),
        (ParameterOutOfRange, EXIT_USAGE),
        (UnresolvedSpectrum, EXIT_FAILURE),
        (GateFailure, EXIT_FAILURE),
    ])
    def test_exit_codes(self, error, code):
        """Test the exit code each error maps to"""
        assert error("x").exit_code == code

    def test_message(self):
        """Test that str() names the error and its detail"""
        assert str(ConfigError("bad N")) == "ConfigError: bad N"


class TestStorage:
    """Unit tests for artifact readers and writers"""

    def test_csv_uses_repr(self, tmp_path):
        """Test that floats are written with full precision"""
        path = write_csv(tmp_path / "t.csv", ("a", "b"), [(0.1, 1.0 / 3.0)])
        lines = path.read_text().splitlines()
        assert lines[0] == "a,b"
        assert lines[1] == f"0.1,{1.0 / 3.0!r}"

    def test_json_handles_numpy(self, tmp_path):
        """Test that arrays and numpy scalars serialize"""
        path = write_json(tmp_path / "out" / "x.json", {"a": np.arange(3), "b": np.float64(2.5)})
        assert read_json(path) == {"a": [0, 1, 2], "b": 2.5}

    def test_read_json_errors(self, tmp_path):
        """Test ConfigError for a missing or malformed file"""
        with pytest.raises(ConfigError):
            read_json(tmp_path / "missing.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigError):
            read_json(bad)

    def test_field_round_trip(self, tmp_path):
        """Test the header line and the little-endian payload"""
        values = np.arange(16, dtype=np.float64).reshape(4, 4)
        path = write_field(tmp_path / "snap", values, 2, 2 * math.pi, "f", 0.5)
        assert path.suffix == ".fld"
        header, back = read_field(path)
        assert header == {"dim": 2, "L": 2 * math.pi, "N": 4, "quantity": "f", "time": 0.5}
        assert np.array_equal(back, values)

    def test_field_name_keeps_dots(self, tmp_path):
        """Test that a dotted ell in the stem survives the suffix"""
        path = write_field(tmp_path / "ell0.5_path0_f_step2", np.zeros((4, 4)), 2, 1.0, "f", 0.0)
        assert path.name == "ell0.5_path0_f_step2.fld"

    def test_read_table(self, tmp_path):
        """Test that comment lines and a text header are skipped"""
        path = tmp_path / "g.csv"
        path.write_text("# tabulated density\nxi,g\n0.0,1.0\n1.0,0.5\n2.0,0.0\n")
        table = read_table(path)
        assert table.shape == (3, 2)
        assert table[1, 1] == 0.5

    @pytest.mark.parametrize("content", [
        "xi,g\n0.0,1.0\n",              # one row
        "0.0,1.0\n1.0,oops\n",          # non-numeric after data
    ])
    def test_read_table_errors(self, tmp_path, content):
        """Test ConfigError for unusable tables"""
        path = tmp_path / "g.csv"
        path.write_text(content)
        with pytest.raises(ConfigError):
            read_table(path)

    def test_read_table_missing(self, tmp_path):
        """Test ConfigError for a missing table"""
        with pytest.raises(ConfigError):
            read_table(tmp_path / "nope.csv")


class TestCache:
    """Unit tests for the per-process memo"""

    def test_builder_runs_once(self, mocker):
        """Test that a hit skips the builder"""
        builder = mocker.Mock(return_value=42)
        assert cache.get_or_build(cache.BASIS_PREFIX, "k", builder) == 42
        assert cache.get_or_build(cache.BASIS_PREFIX, "k", builder) == 42
        builder.assert_called_once()

    def test_clear_by_prefix(self):
        """Test that clearing one prefix keeps the others"""
        cache.set_cached(cache.BASIS_PREFIX, "a", 1)
        cache.set_cached(cache.INITIAL_PREFIX, "a", 2)
        cache.clear_cache(cache.BASIS_PREFIX)
        assert cache.get_cached(cache.BASIS_PREFIX, "a") is None
        assert cache.get_cached(cache.INITIAL_PREFIX, "a") == 2

    def test_least_recently_used_is_evicted(self, mocker):
        """Test the per-prefix cap drops the entry unused the longest"""
        mocker.patch("core.cache.settings.CACHE_MAX_ENTRIES", 2)
        cache.set_cached(cache.MULTIPLIER_PREFIX, "a", 1)
        cache.set_cached(cache.MULTIPLIER_PREFIX, "b", 2)
        assert cache.get_cached(cache.MULTIPLIER_PREFIX, "a") == 1
        cache.set_cached(cache.MULTIPLIER_PREFIX, "c", 3)
        assert cache.get_cached(cache.MULTIPLIER_PREFIX, "b") is None
        assert cache.get_cached(cache.MULTIPLIER_PREFIX, "a") == 1
        assert cache.get_cached(cache.MULTIPLIER_PREFIX, "c") == 3

    def test_cap_is_per_prefix(self, mocker):
        """Test that filling one prefix leaves the others alone"""
        mocker.patch("core.cache.settings.CACHE_MAX_ENTRIES", 1)
        cache.set_cached(cache.BASIS_PREFIX, "a", 1)
        cache.set_cached(cache.NORM_PREFIX, "a", 2)
        cache.set_cached(cache.NORM_PREFIX, "b", 3)
        assert cache.get_cached(cache.BASIS_PREFIX, "a") == 1
        assert cache.get_cached(cache.NORM_PREFIX, "a") is None

    def test_fingerprint_ignores_key_order(self):
        """Test that equal payloads share a fingerprint"""
        assert cache.fingerprint({"a": 1, "b": 2}) == cache.fingerprint({"b": 2, "a": 1})
        assert cache.fingerprint({"a": 1}) != cache.fingerprint({"a": 2})


class TestConfigModels:
    """Unit tests for config parsing and validation"""

    def test_echo_reparses(self, transport_payload):
        """Test that the config echo parses back to the same config"""
        cfg = ExperimentConfig.parse_obj(transport_payload)
        again = ExperimentConfig.parse_obj(json.loads(json.dumps(cfg.echo())))
        assert again == cfg

    def test_lambda_alias(self, transport_payload):
        """Test that lambda is read under its JSON name"""
        cfg = ExperimentConfig.parse_obj({**transport_payload, "lambda": 2.0})
        assert cfg.lam == 2.0
        assert cfg.echo()["lambda"] == 2.0

    @pytest.mark.parametrize("override", [
        {"N": 31},                  # odd grid
        {"p": 2.5},                 # outside (1, 2]
        {"p": 1.0},                 # open at 1
        {"ell_grid": []},
        {"ell_grid": [0.5, 0.5]},   # repeated ell
        {"dt": 1.0},                # longer than T
        {"seed": -1},
        {"q": 0.5},
    ])
    def test_rejects(self, transport_payload, override):
        """Test ConfigError for schema violations"""
        with pytest.raises(ConfigError):
            parse_config({**transport_payload, **override}, ExperimentConfig)

    def test_load_config_overrides_seed(self, write_config, transport_payload):
        """Test that the command-line seed replaces the file's"""
        path = write_config(transport_payload)
        assert load_config(path, ExperimentConfig, seed=99).seed == 99
        assert load_config(path, ExperimentConfig).seed == transport_payload["seed"]

    def test_load_config_needs_object(self, write_config):
        """Test ConfigError for a JSON array"""
        with pytest.raises(ConfigError):
            load_config(write_config([1, 2]), ExperimentConfig)

    def test_noise_config_needs_spectrum(self):
        """Test that a noise config without spectra or ell is refused"""
        with pytest.raises(ConfigError):
            parse_config({"N": 32}, NoiseValidationConfig)

    def test_solver_steps(self):
        """Test the step count from T and dt"""
        assert SolverConfig(kappa=0.25, dt=0.005, T=0.02).steps == 4

    def test_lebesgue_norm_spec(self):
        """Test that a Lebesgue exponent below 1 is refused"""
        with pytest.raises(ValueError):
            NormSpec(kind="lebesgue", index=0.5)

    def test_doubled(self, transport_payload):
        """Test that doubling keeps the grid spacing"""
        cfg = ExperimentConfig.parse_obj(transport_payload)
        twice = cfg.doubled()
        assert twice.L / twice.N == pytest.approx(cfg.L / cfg.N)


class TestManifest:
    """Unit tests for the run manifest"""

    def test_lists_artifacts(self, tmp_path):
        """Test that every artifact and the manifest itself are listed"""
        artifact = write_json(tmp_path / "fit.json", {"slope": 1.0})
        manifest = RunManifest(command="rate", config={}, seed=0, started_at=now(), code_version="1.0.0")
        path = finish_manifest(manifest, tmp_path, [artifact])
        payload = read_json(path)
        assert path.name == MANIFEST_NAME
        assert payload["artifacts"] == [str(artifact), str(path)]
        assert payload["finished_at"] is not None

    def test_missing_artifact(self, tmp_path):
        """Test ArtifactError when a listed file was never written"""
        manifest = RunManifest(command="rate", config={}, seed=0, started_at=now(), code_version="1.0.0")
        with pytest.raises(ArtifactError):
            finish_manifest(manifest, tmp_path, [tmp_path / "rates.csv"])
