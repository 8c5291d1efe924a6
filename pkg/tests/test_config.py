"""Tests for settings resolution."""

import json
from pathlib import Path

import pytest

from nilcap.config import DEFAULT_MAX_BASIS, DEFAULT_MAX_ENUM, load_settings
from nilcap.exceptions import OutOfRangeError


class TestLoadSettings:
    def test_defaults(self, tmp_path):
        settings = load_settings(tmp_path / "absent.json")
        assert settings.max_enum == DEFAULT_MAX_ENUM
        assert settings.max_basis == DEFAULT_MAX_BASIS
        assert settings.cache_dir == tmp_path / "cache"

    def test_env_override(self, monkeypatch, tmp_path):
        monkeypatch.setenv("NILCAP_MAX_ENUM", "500")
        assert load_settings(tmp_path / "absent.json").max_enum == 500

    def test_placeholder_ignored(self, monkeypatch, tmp_path):
        monkeypatch.setenv("NILCAP_MAX_ENUM", "${NILCAP_MAX_ENUM}")
        assert load_settings(tmp_path / "absent.json").max_enum == DEFAULT_MAX_ENUM

    def test_config_file(self, monkeypatch, tmp_path):
        monkeypatch.delenv("NILCAP_CACHE_DIR")
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"maxEnum": 64, "maxBasis": 100, "cacheDir": str(tmp_path / "pc")}))
        settings = load_settings(path)
        assert settings.max_enum == 64
        assert settings.max_basis == 100
        assert settings.cache_dir == tmp_path / "pc"

    def test_env_beats_config_file(self, monkeypatch, tmp_path):
        monkeypatch.setenv("NILCAP_MAX_BASIS", "7")
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"maxBasis": 100}))
        assert load_settings(path).max_basis == 7

    def test_cache_dir_expands_home(self, monkeypatch, tmp_path):
        monkeypatch.setenv("NILCAP_CACHE_DIR", "~/pcs")
        assert load_settings(tmp_path / "absent.json").cache_dir == Path("~/pcs").expanduser()

    def test_unreadable_config_ignored(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{not json")
        assert load_settings(path).max_enum == DEFAULT_MAX_ENUM

    def test_bad_integer(self, monkeypatch, tmp_path):
        monkeypatch.setenv("NILCAP_MAX_ENUM", "lots")
        with pytest.raises(OutOfRangeError, match="NILCAP_MAX_ENUM"):
            load_settings(tmp_path / "absent.json")

    def test_non_positive(self, monkeypatch, tmp_path):
        monkeypatch.setenv("NILCAP_MAX_BASIS", "0")
        with pytest.raises(OutOfRangeError, match="must be positive"):
            load_settings(tmp_path / "absent.json")
