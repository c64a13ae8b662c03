"""Tests for `hm doctor` diagnostics (headmotion/doctor.py)."""

import json

import headmotion.doctor as doctor


class TestCollect:
    """The diagnostics dict on the current (working) test environment."""

    def test_collect_has_expected_shape(self):
        info = doctor.collect()
        for key in (
            "headmotion_version",
            "python",
            "platform",
            "dependencies",
            "settings",
            "loopback",
            "problems",
        ):
            assert key in info, key

    def test_dependencies_import_in_test_env(self):
        deps = doctor.collect()["dependencies"]
        assert set(deps) == {"numpy", "pandas", "joblib"}
        assert all(deps.values())

    def test_bad_setting_is_a_problem(self, monkeypatch):
        monkeypatch.setenv("HEADMOTION_STD", "unbiased")
        info = doctor.collect()
        assert info["settings"]["effective"] is None
        assert info["settings"]["raw"]["HEADMOTION_STD"] == "unbiased"
        assert any("HEADMOTION_STD" in symptom for symptom, _ in info["problems"])

    def test_json_serializable(self):
        info = doctor.collect()
        json.loads(json.dumps(info))


class TestRender:
    def test_render_is_text(self):
        text = doctor.render(doctor.collect())
        assert "headmotion environment report" in text
        assert "Dependencies:" in text

    def test_render_handles_missing_dependency(self):
        fake = {
            "headmotion_version": "0.0.0",
            "python": "3.x",
            "platform": "test",
            "dependencies": {"numpy": "1.26.0", "pandas": None, "joblib": "1.3.2"},
            "settings": {"raw": {"HEADMOTION_JOBS": None}, "effective": None},
            "loopback": False,
            "problems": [("pandas cannot be imported (boom)", "pip install pandas")],
        }
        text = doctor.render(fake)
        assert "MISSING" in text
        assert "UNAVAILABLE" in text
        assert "pip install pandas" in text


class TestRun:
    def test_exit_code_reflects_problems(self, monkeypatch, capsys):
        monkeypatch.setenv("HEADMOTION_JOBS", "0")
        assert doctor.run() == 1
        assert "HEADMOTION_JOBS" in capsys.readouterr().out

    def test_json_output(self, capsys):
        doctor.run(as_json=True)
        info = json.loads(capsys.readouterr().out)
        assert info["dependencies"]["numpy"]
