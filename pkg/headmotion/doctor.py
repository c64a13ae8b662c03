"""
Environment diagnostics for headmotion: `hm doctor`.

Reports the versions of the numeric stack, the effective HEADMOTION_*
settings, and whether a loopback socket can be opened for the device
emulator. A broken dependency or a bad environment variable shows up as a
problem with a fix, never as a crash.
"""

import importlib
import os
import platform
import socket

DEPENDENCIES = ("numpy", "pandas", "joblib")


# ---------------------------------------------------------------------------
# Checks (never raise; failures become fields / problems)
# ---------------------------------------------------------------------------
def _dependency_info(problems):
    info = {}
    for name in DEPENDENCIES:
        try:
            module = importlib.import_module(name)
            info[name] = getattr(module, "__version__", "unknown")
        except Exception as e:
            info[name] = None
            problems.append((f"{name} cannot be imported ({e})", f"pip install {name}"))
    return info


def _settings_info(problems):
    from .config import ENV_VARS, load_settings

    raw = {name: os.environ.get(name) for name in ENV_VARS}
    try:
        settings = load_settings()
    except ValueError as e:
        problems.append((str(e), "unset the variable or give it one of the listed values"))
        return {"raw": raw, "effective": None}
    effective = {
        "jobs": settings.jobs,
        "std": settings.std,
        "aggregate": settings.aggregate,
        "log_level": settings.log_level,
        "traceback": settings.traceback,
    }
    return {"raw": raw, "effective": effective}


def _loopback_info(problems):
    try:
        with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as s:
            s.bind(("127.0.0.1", 0))
            s.listen(1)
        return True
    except OSError as e:
        problems.append(
            (
                f"cannot listen on 127.0.0.1 ({e.strerror or e})",
                "serve-device needs a local TCP port; check sandbox or firewall rules",
            )
        )
        return False


# ---------------------------------------------------------------------------
# Top-level collection
# ---------------------------------------------------------------------------
def collect():
    """Gather the full diagnostics dict. Never raises."""
    from ._version import __version__

    problems = []
    info = {
        "headmotion_version": __version__,
        "python": platform.python_version(),
        "platform": platform.platform(),
    }
    info["dependencies"] = _dependency_info(problems)
    info["settings"] = _settings_info(problems)
    info["loopback"] = _loopback_info(problems)
    info["problems"] = problems
    return info


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------
def _fmt(label, value):
    return f"  {label:<22} {value}"


def render(info):
    """Render the diagnostics dict as a human-readable report."""
    out = ["headmotion environment report", "=" * 40]
    out.append(_fmt("headmotion version", info["headmotion_version"]))
    out.append(_fmt("Python", info["python"]))
    out.append(_fmt("Platform", info["platform"]))

    out.append("")
    out.append("Dependencies:")
    for name, version in info["dependencies"].items():
        out.append(_fmt(name, version or "MISSING"))

    settings = info["settings"]
    out.append("")
    out.append("Environment:")
    for name, value in settings["raw"].items():
        out.append(_fmt(name, value if value is not None else "(unset)"))
    if settings["effective"] is not None:
        out.append("")
        out.append("Effective settings:")
        for name, value in settings["effective"].items():
            out.append(_fmt(name, value))

    out.append("")
    out.append(_fmt("Loopback TCP", "ok" if info["loopback"] else "UNAVAILABLE"))

    out.append("")
    if info["problems"]:
        out.append(f"Problems ({len(info['problems'])}):")
        for symptom, hint in info["problems"]:
            out.append(f"  ✗ {symptom}")
            out.append(f"      → {hint}")
    else:
        out.append("No problems detected. ✓")
    return "\n".join(out)


def run(as_json=False):
    """Entry point for `hm doctor`. Returns a process exit code."""
    info = collect()
    if as_json:
        import json

        print(json.dumps(info, indent=2))
    else:
        print(render(info))
    return 1 if info["problems"] else 0
