import logging

from config import DEFAULTS, default_integrator_config, get_settings


def test_defaults():
    settings = get_settings()
    assert settings.to_dict() == DEFAULTS


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("DIHEDRAL_QUAD_ORDER", "128")
    monkeypatch.setenv("DIHEDRAL_REL_TOL", "1e-8")
    monkeypatch.setenv("DIHEDRAL_LOG_LEVEL", " debug ")
    settings = get_settings()
    assert settings.quad_order == 128
    assert settings.rel_tol == 1e-8
    assert settings.log_level == "DEBUG"


def test_malformed_value_falls_back(monkeypatch, caplog):
    monkeypatch.setenv("DIHEDRAL_WORKERS", "many")
    with caplog.at_level(logging.WARNING, logger="config"):
        assert get_settings().workers == DEFAULTS["workers"]
    assert "DIHEDRAL_WORKERS" in caplog.text


def test_empty_value_uses_default(monkeypatch):
    monkeypatch.setenv("DIHEDRAL_GRID", "")
    assert get_settings().grid == DEFAULTS["grid"]


def test_integrator_config_follows_settings(monkeypatch):
    monkeypatch.setenv("DIHEDRAL_MAX_STEP", "0.01")
    cfg = default_integrator_config()
    assert cfg.max_step == 0.01
    assert cfg.rel_tol == DEFAULTS["rel_tol"]
