"""Tests for HEADMOTION_* settings (headmotion/config.py)."""

import logging

import pytest

from headmotion.config import Settings, configure_logging, load_settings
from headmotion.errors import ConfigError


class TestLoadSettings:
    def test_defaults(self):
        assert load_settings({}) == Settings()
        assert Settings().ddof == 0

    def test_values(self):
        settings = load_settings(
            {
                "HEADMOTION_JOBS": "4",
                "HEADMOTION_STD": "Sample",
                "HEADMOTION_AGGREGATE": "cv",
                "HEADMOTION_LOG_LEVEL": "debug",
                "HEADMOTION_TRACEBACK": "1",
            }
        )
        assert settings == Settings(
            jobs=4, std="sample", aggregate="cv", log_level="DEBUG", traceback=True
        )
        assert settings.ddof == 1

    def test_empty_values_mean_default(self):
        assert load_settings({"HEADMOTION_JOBS": "", "HEADMOTION_STD": ""}) == Settings()

    @pytest.mark.parametrize(
        "name,value",
        [
            ("HEADMOTION_JOBS", "0"),
            ("HEADMOTION_JOBS", "many"),
            ("HEADMOTION_STD", "unbiased"),
            ("HEADMOTION_AGGREGATE", "best"),
            ("HEADMOTION_LOG_LEVEL", "LOUD"),
        ],
    )
    def test_invalid(self, name, value):
        with pytest.raises(ConfigError) as info:
            load_settings({name: value})
        assert name in str(info.value)
        assert isinstance(info.value, ValueError)

    def test_reads_os_environ(self, monkeypatch):
        monkeypatch.setenv("HEADMOTION_JOBS", "3")
        assert load_settings().jobs == 3


class TestOverrides:
    def test_none_keeps_the_setting(self):
        base = Settings(jobs=2, std="sample")
        assert base.with_overrides(jobs=None, std=None) == base

    def test_flag_wins(self):
        assert Settings(jobs=2).with_overrides(jobs=8, aggregate="cv") == Settings(
            jobs=8, aggregate="cv"
        )


class TestLogging:
    def test_single_stderr_handler(self):
        configure_logging("INFO")
        configure_logging("DEBUG")
        root = logging.getLogger("headmotion")
        assert len(root.handlers) == 1
        assert root.level == logging.DEBUG
        assert root.propagate is False
