"""Shared fixtures."""

from __future__ import annotations

import pytest

from nilcap.nilprod import GroupSpec, PcPresentation, build_group


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """Keep every test away from the user's cache directory and config."""
    monkeypatch.setenv("NILCAP_CACHE_DIR", str(tmp_path / "cache"))
    monkeypatch.delenv("NILCAP_MAX_ENUM", raising=False)
    monkeypatch.delenv("NILCAP_MAX_BASIS", raising=False)
    monkeypatch.setattr("nilcap.config._CONFIG_PATH", tmp_path / "missing" / "config.json")


@pytest.fixture
def d8() -> PcPresentation:
    """C2 *^{N_2} C2: dihedral of order 8."""
    return build_group(GroupSpec(2, 2, (1, 1)))


@pytest.fixture
def d16() -> PcPresentation:
    """C2 *^{N_3} C2: dihedral of order 16."""
    return build_group(GroupSpec(2, 3, (1, 1)))


@pytest.fixture
def g64() -> PcPresentation:
    """C2 *^{N_3} C4."""
    return build_group(GroupSpec(2, 3, (1, 2)))


@pytest.fixture
def g243() -> PcPresentation:
    """C3 *^{N_3} C3."""
    return build_group(GroupSpec(3, 3, (1, 1)))
