from fractions import Fraction

import pytest

from config import load_settings

ENV_KEYS = (
    "HYPERCHECK_ORDER",
    "HYPERCHECK_FC_ORDER",
    "HYPERCHECK_R_VALUES",
    "HYPERCHECK_WORKERS",
    "HYPERCHECK_FAMILY_FILE",
    "LOG_LEVEL",
)


@pytest.fixture
def clean_env(monkeypatch):
    for key in ENV_KEYS:
        monkeypatch.delenv(key, raising=False)
    return monkeypatch


def test_defaults_without_yaml(clean_env, tmp_path):
    settings = load_settings(tmp_path / "missing.yaml")
    assert settings.order == 12
    assert settings.fc_order == 8
    assert settings.r_values == (Fraction(1, 3), Fraction(2, 5), Fraction(3, 7))
    assert settings.workers >= 1
    assert settings.family_file is None
    assert settings.log_level == "INFO"


def test_yaml_values(clean_env, tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(
        "HYPERCHECK_ORDER: 10\nHYPERCHECK_R_VALUES: [1/3, 2/7]\nHYPERCHECK_WORKERS: 3\nLOG_LEVEL: debug\n",
        encoding="utf-8",
    )
    settings = load_settings(path)
    assert settings.order == 10
    assert settings.r_values == (Fraction(1, 3), Fraction(2, 7))
    assert settings.workers == 3
    assert settings.log_level == "DEBUG"


def test_environment_overrides_yaml(clean_env, tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("HYPERCHECK_ORDER: 10\n", encoding="utf-8")
    clean_env.setenv("HYPERCHECK_ORDER", "14")
    clean_env.setenv("HYPERCHECK_FAMILY_FILE", "families.yaml")
    settings = load_settings(path)
    assert settings.order == 14
    assert settings.family_file == "families.yaml"
