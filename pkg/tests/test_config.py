from config import get_config_info, validate_config
from config.settings import AppConfig


def test_shipped_configuration_is_consistent():
    assert validate_config() == []


def test_budget_resolution(monkeypatch):
    monkeypatch.delenv(AppConfig.ENV_BUDGET, raising=False)
    assert AppConfig.budget() == AppConfig.ENUMERATION_BUDGET
    assert AppConfig.budget(default=5) == 5
    monkeypatch.setenv(AppConfig.ENV_BUDGET, "7")
    assert AppConfig.budget() == 7
    assert AppConfig.budget(3) == 3


def test_seed_resolution(monkeypatch):
    monkeypatch.delenv(AppConfig.ENV_SEED, raising=False)
    assert AppConfig.seed() == AppConfig.DEFAULT_SEED
    monkeypatch.setenv(AppConfig.ENV_SEED, "11")
    assert AppConfig.seed() == 11


def test_log_level(monkeypatch):
    monkeypatch.setenv(AppConfig.ENV_LOG_LEVEL, "debug")
    assert AppConfig.log_level() == "DEBUG"


def test_config_info():
    info = get_config_info()
    assert info["app_version"] == AppConfig.APP_VERSION
    assert info["fixtures_dir"].endswith("fixtures")
