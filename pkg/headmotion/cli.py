#!/usr/bin/env python3
"""
Command-line interface for headmotion (`hm`).

Data goes to stdout or to files; progress and errors go to stderr.
Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 internal error.
"""

import argparse
import json
import sys
from pathlib import Path

from ._version import __version__

# NOTE: the numeric modules (pandas, joblib, the classifiers) are imported
# inside each command, so `hm --help` and `hm doctor` work on a broken install.


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors to main() instead of exiting 2."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _say(message):
    print(message, file=sys.stderr)


def _timeline_beside(session_path):
    session_path = Path(session_path)
    return session_path.with_name(f"{session_path.stem}.timeline.csv")


def _labeled(session_path, timeline_path):
    from .session import label_samples, read_session, read_timeline

    session = read_session(session_path)
    timeline = read_timeline(timeline_path or _timeline_beside(session_path))
    return session, timeline, label_samples(session.samples, timeline, session.participant_id)


def _session_files(inputs):
    files = []
    for item in inputs:
        path = Path(item)
        if path.is_dir():
            files.extend(sorted(path.glob("*.jsonl")))
        else:
            files.append(path)
    return files


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------
def simulate(args, settings):
    """Generate a synthetic cohort."""
    from .synth import generate_cohort, preset, write_cohort

    cfg = preset(
        args.preset,
        args.seed,
        n_participants=args.participants,
        sample_period_ms=args.sample_period_ms,
    )
    _say(f"Generating {cfg.n_participants} participants ({cfg.name} preset, seed {cfg.seed})...")
    cohort = generate_cohort(cfg, jobs=settings.jobs)
    written = write_cohort(cohort, args.out)
    _say(f"Wrote {len(written)} files to {args.out}")


def serve_device(args, settings):
    """Stream a session over TCP as the earable would."""
    from .device import DeviceEmulator
    from .session import read_session

    session = read_session(args.session)
    with DeviceEmulator(session, period_ms=args.period_ms, realtime=args.realtime) as device:
        host, port = device.bind(args.host, args.port)
        mode = f"realtime, {args.period_ms} ms/sample" if args.realtime else "firehose"
        _say(
            f"Serving {len(session)} samples of {session.participant_id} on {host}:{port} ({mode})"
        )
        device.serve_forever(once=args.once)


def capture_session(args, settings):
    """Record a session from a (real or emulated) device."""
    from .device import capture
    from .session import persist_session

    participant = args.participant_id or Path(args.out).stem
    session, stats = capture(args.host, args.port, participant, timeout=args.timeout)
    persist_session(session, args.out)
    _say(
        f"Captured {stats.packets} packets ({stats.corrupted} corrupted, "
        f"{stats.skipped_bytes} bytes skipped, {stats.sequence_gaps} sequence gaps) -> {args.out}"
    )


def featurize_sessions(args, settings):
    """Per-emotion magnitude features of one or more sessions."""
    from .features import featurize, write_features_csv

    files = _session_files(args.inputs)
    if not files:
        raise UsageError("featurize: no session files found")
    if args.timeline and len(files) > 1:
        raise UsageError("featurize: --timeline applies to a single session")
    rows = {}
    for path in files:
        session, _, labeled = _labeled(path, args.timeline)
        if session.participant_id in rows:
            raise ValueError(f"{path}: participant {session.participant_id!r} appears twice")
        rows[session.participant_id] = featurize(labeled, ddof=settings.ddof)
    text = write_features_csv(rows, args.out)
    if args.out:
        _say(f"Wrote features of {len(rows)} session(s) to {args.out}")
    else:
        sys.stdout.write(text)


def trace_session(args, settings):
    """Per-second magnitudes of a session."""
    from .features import magnitude_trace, write_trace_csv

    _, _, labeled = _labeled(args.session, args.timeline)
    text = write_trace_csv(magnitude_trace(labeled), args.out)
    if not args.out:
        sys.stdout.write(text)


def check_session(args, settings):
    """Validate a session/timeline pair and summarize it."""
    _, timeline, labeled = _labeled(args.session, args.timeline)
    print(f"participant: {labeled.participant_id}")
    print(f"samples:     {len(labeled) + labeled.dropped}")
    print(f"segments:    {len(timeline)}")
    for emotion in labeled.emotions():
        print(f"  {emotion.label:<9} {len(labeled.samples_for(emotion))}")
    print(f"dropped:     {labeled.dropped}")


def train(args, settings):
    """Train the trait x emotion model matrix."""
    from .learn import parse_pool
    from .matrix import load_cohort, save_matrix, train_matrix

    pool = parse_pool(args.pool)
    cohort = load_cohort(args.features, args.traits)
    _say(
        f"Training 35 + 1 models on {len(cohort)} participants "
        f"({len(pool)} classifiers, k={args.k})..."
    )
    matrix = train_matrix(
        cohort, pool, k=args.k, seed=args.seed, jobs=settings.jobs, aggregate=settings.aggregate
    )
    path = save_matrix(matrix, args.out)
    _say(f"Saved models to {path}")


def evaluate(args, settings):
    """Render the report of a trained matrix."""
    from dataclasses import replace

    from .matrix import load_matrix, render_report, render_text, write_report

    # --aggregate, then HEADMOTION_AGGREGATE, decide the best emotion per trait
    matrix = replace(load_matrix(args.models), aggregate=settings.aggregate)
    report = render_report(matrix)
    if args.report:
        write_report(report, args.report)
        _say(f"Wrote report to {args.report}")
    sys.stdout.write(render_text(report))


def predict_session(args, settings):
    """Predict traits and per-segment emotions for one session."""
    from .features import MIN_SAMPLES, featurize, segment_features
    from .matrix import TRAITS, best_per_trait, load_matrix, predict_emotion, predict_trait
    from .session import segment_samples

    matrix = load_matrix(args.models)
    session, timeline, labeled = _labeled(args.session, args.timeline)
    features = featurize(labeled, ddof=settings.ddof)
    best = best_per_trait(matrix, settings.aggregate)
    traits = {}
    for trait in TRAITS:
        traits[trait.value] = {
            "question": trait.question,
            "value": predict_trait(matrix, features, trait, settings.aggregate),
            "emotion": best[trait][0].label,
        }
    segments = []
    for segment, samples in segment_samples(session.samples, timeline):
        predicted = None
        if len(samples) >= MIN_SAMPLES:
            predicted = predict_emotion(matrix, segment_features(samples, settings.ddof)).label
        segments.append(
            {
                "emotion": segment.emotion.label,
                "start_ms": segment.start_ms,
                "end_ms": segment.end_ms,
                "n_samples": len(samples),
                "predicted_emotion": predicted,
            }
        )
    result = {
        "participant_id": session.participant_id,
        "traits": traits,
        "segments": segments,
        "dropped_samples": labeled.dropped,
    }
    print(json.dumps(result, indent=2))


def doctor(args, settings):
    """Report the headmotion environment and how to fix what's wrong."""
    from . import doctor as _doctor

    return _doctor.run(as_json=args.json)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------
def _non_negative_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _positive_int(text):
    value = _non_negative_int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser():
    parser = _Parser(
        prog="hm",
        description="headmotion - head-movement IMU capture, features and trait models",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"headmotion {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for INFO logs, -vv for DEBUG"
    )
    sub = parser.add_subparsers(title="commands", dest="command", parser_class=_Parser)

    p = sub.add_parser("simulate", help="Generate a synthetic cohort")
    p.add_argument("--preset", choices=["strong", "null"], default="strong")
    p.add_argument("--participants", type=_positive_int, default=46)
    p.add_argument("--seed", type=_non_negative_int, required=True)
    p.add_argument("--out", required=True, help="Output directory")
    p.add_argument("--sample-period-ms", type=_positive_int, default=1000)
    p.add_argument("--jobs", type=_positive_int, default=None, help="Worker threads")
    p.set_defaults(func=simulate)

    p = sub.add_parser("serve-device", help="Emulate the earable over TCP")
    p.add_argument("--session", required=True, help="Session JSONL to stream")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=_non_negative_int, required=True, help="0 picks a free port")
    p.add_argument("--period-ms", type=_non_negative_int, default=1000)
    p.add_argument("--realtime", action="store_true", help="Pace one sample per period")
    p.add_argument("--once", action="store_true", help="Exit after the first client")
    p.set_defaults(func=serve_device)

    p = sub.add_parser("capture", help="Record a session from a device")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=_positive_int, required=True)
    p.add_argument("--out", required=True, help="Session JSONL to write")
    p.add_argument("--participant-id", default=None, help="Default: the output file stem")
    p.add_argument("--timeout", type=float, default=None, help="Socket timeout (s)")
    p.set_defaults(func=capture_session)

    p = sub.add_parser("featurize", help="Per-emotion features of sessions")
    p.add_argument("inputs", nargs="+", help="Session files or directories of *.jsonl")
    p.add_argument("--timeline", help="Default: <stem>.timeline.csv beside each session")
    p.add_argument("--out", help="Features CSV (default: stdout)")
    p.add_argument("--sample-std", action="store_true", help="Use the n-1 standard deviation")
    p.set_defaults(func=featurize_sessions)

    p = sub.add_parser("trace", help="Per-second magnitude trace of a session")
    p.add_argument("--session", required=True)
    p.add_argument("--timeline")
    p.add_argument("--out", help="Trace CSV (default: stdout)")
    p.set_defaults(func=trace_session)

    p = sub.add_parser("check", help="Validate a session/timeline pair")
    p.add_argument("session")
    p.add_argument("--timeline")
    p.set_defaults(func=check_session)

    p = sub.add_parser("train", help="Train the trait x emotion model matrix")
    p.add_argument("--features", required=True)
    p.add_argument("--traits", required=True)
    p.add_argument("--k", type=_positive_int, default=5, help="Cross-validation folds")
    p.add_argument("--seed", type=_non_negative_int, required=True)
    p.add_argument("--out", required=True, help="Models directory")
    p.add_argument("--pool", default="default", help='e.g. "oner,knn:k=1,forest:n_trees=10"')
    p.add_argument("--aggregate", choices=["resubstitution", "cv"], default=None)
    p.add_argument("--jobs", type=_positive_int, default=None, help="Worker threads")
    p.set_defaults(func=train)

    p = sub.add_parser("evaluate", help="Report on a trained matrix")
    p.add_argument("--models", required=True)
    p.add_argument("--report", help="Report JSON to write")
    p.add_argument("--aggregate", choices=["resubstitution", "cv"], default=None)
    p.set_defaults(func=evaluate)

    p = sub.add_parser("predict", help="Predict traits and emotions for a session")
    p.add_argument("--models", required=True)
    p.add_argument("--session", required=True)
    p.add_argument("--timeline")
    p.add_argument("--sample-std", action="store_true")
    p.add_argument("--aggregate", choices=["resubstitution", "cv"], default=None)
    p.set_defaults(func=predict_session)

    p = sub.add_parser("doctor", help="Diagnose the headmotion environment")
    p.add_argument("--json", action="store_true", help="Emit the report as JSON for scripts")
    p.set_defaults(func=doctor)

    return parser


def main(argv=None):
    """Main CLI entry point."""
    from .config import configure_logging, load_settings
    from .errors import HeadMotionError

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        _say(str(e))
        return 1
    except SystemExit as e:  # --help / --version
        return e.code if isinstance(e.code, int) else 0

    if not args.command:
        parser.print_help(sys.stderr)
        return 1

    show_traceback = False
    try:
        settings = load_settings()
        show_traceback = settings.traceback
        settings = settings.with_overrides(
            jobs=getattr(args, "jobs", None),
            std="sample" if getattr(args, "sample_std", False) else None,
            aggregate=getattr(args, "aggregate", None),
        )
        level = {0: settings.log_level, 1: "INFO"}.get(args.verbose, "DEBUG")
        configure_logging(level)
        result = args.func(args, settings)
        return result if result is not None else 0
    except UsageError as e:
        _say(str(e))
        return 1
    except KeyboardInterrupt:
        return 130
    except (HeadMotionError, OSError, ValueError) as e:
        _say(f"Error: {e}")
        # Data errors carry a self-explanatory message; the traceback is opt-in.
        if show_traceback:
            import traceback

            traceback.print_exc()
        else:
            _say("(set HEADMOTION_TRACEBACK=1 for the full traceback)")
        return 2
    except Exception as e:
        import traceback

        _say(f"Internal error: {e}")
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())
