import pytest

from cdeflow.base import CheckReport, ValidationError
from cdeflow.config import TOLERANCE_NAMES, Config, get_config, set_config


def test_defaults():
    cfg = Config()
    assert cfg.seed == 42
    assert cfg.membership_tol == 1e-9
    assert cfg.rel_tol == 1e-10
    assert cfg.degree_cap == 6
    assert str(cfg.output_dir) == "output"


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("CDEFLOW_REL_TOL", "1e-6")
    monkeypatch.setenv("CDEFLOW_SEED", "7")
    cfg = Config()
    assert cfg.rel_tol == 1e-6
    assert cfg.seed == 7


def test_environment_rejects_garbage(monkeypatch):
    monkeypatch.setenv("CDEFLOW_DET_TOL", "petit")
    with pytest.raises(ValidationError, match="CDEFLOW_DET_TOL"):
        Config()


def test_with_overrides_returns_a_copy():
    cfg = Config()
    updated = cfg.with_overrides({"rel_tol": "1e-8", "degree_cap": "9"})
    assert updated.rel_tol == 1e-8
    assert updated.degree_cap == 9 and isinstance(updated.degree_cap, int)
    assert cfg.rel_tol == 1e-10


@pytest.mark.parametrize("overrides", [{"nope": 1.0}, {"rel_tol": "-1"}, {"abs_tol": "abc"}])
def test_with_overrides_rejects(overrides):
    with pytest.raises(ValidationError):
        Config().with_overrides(overrides)


def test_heartbeat_x0_may_be_negative():
    assert Config().with_overrides({"heartbeat_x0": "-0.2"}).heartbeat_x0 == -0.2


def test_tolerances_cover_every_name():
    assert set(Config().tolerances()) == set(TOLERANCE_NAMES)


def test_set_config_swaps_the_global():
    original = get_config()
    replacement = original.with_overrides({"horizon": 3})
    set_config(replacement)
    assert get_config() is replacement
    set_config(original)
    assert get_config() is original


def test_check_report_flags_errors():
    report = CheckReport()
    report.add("ok: rien")
    report.add("warning: attention")
    assert report.passed
    report.add("error: cassé")
    assert not report.passed
    assert report.warnings == ["warning: attention"]
