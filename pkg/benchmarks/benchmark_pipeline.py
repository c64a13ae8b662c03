#!/usr/bin/env python3
"""
Benchmark: synthetic cohort -> features -> model matrix

Times each stage of the pipeline on a generated cohort, then each classifier
of the default pool on its own, then the full matrix at several thread counts.

Usage:
    python benchmark_pipeline.py [participants] [iterations]

Example:
    python benchmark_pipeline.py 46 3
"""

import sys
import time
from pathlib import Path

# Add headmotion to path for development
sys.path.insert(0, str(Path(__file__).parent.parent))

from headmotion.features import featurize
from headmotion.learn import DEFAULT_POOL, k_fold_cv
from headmotion.matrix import (
    CohortFeatures,
    ParticipantFeatures,
    TraitId,
    emotion_dataset,
    trait_dataset,
    train_matrix,
)
from headmotion.session import EmotionState, label_samples
from headmotion.synth import generate_cohort, strong_preset


def timed(fn, iterations):
    """Run ``fn`` ``iterations`` times; returns (last result, list of seconds)."""
    times = []
    result = None
    for _ in range(iterations):
        start = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - start)
    return result, times


def summary(times):
    avg, low, high = (1000 * v for v in (sum(times) / len(times), min(times), max(times)))
    return f"avg {avg:9.1f} ms   min {low:9.1f} ms   max {high:9.1f} ms"


def cohort_features(cohort):
    participants = []
    for p in cohort.participants:
        labeled = label_samples(p.session.samples, p.timeline, p.record.id)
        participants.append(ParticipantFeatures(p.record, featurize(labeled)))
    return CohortFeatures(tuple(participants))


def main():
    participants = int(sys.argv[1]) if len(sys.argv) > 1 else 46
    iterations = int(sys.argv[2]) if len(sys.argv) > 2 else 3

    print("=" * 70)
    print(f"headmotion pipeline benchmark: {participants} participants, {iterations} iteration(s)")
    print("=" * 70)

    config = strong_preset(seed=7, n_participants=participants)
    cohort, times = timed(lambda: generate_cohort(config), iterations)
    samples = sum(len(p.session) for p in cohort.participants)
    print(f"\ngenerate ({samples} samples)".ljust(34) + summary(times))

    features, times = timed(lambda: cohort_features(cohort), iterations)
    print("label + featurize".ljust(33) + summary(times))

    print("\nPer classifier, 5-fold CV:")
    cell = trait_dataset(features, TraitId.SMOKER, EmotionState.HAPPY)
    emotions = emotion_dataset(features)
    for spec in DEFAULT_POOL:
        _, cell_times = timed(lambda: k_fold_cv(spec, cell, k=5, seed=0), iterations)
        _, emotion_times = timed(lambda: k_fold_cv(spec, emotions, k=5, seed=0), iterations)
        print(f"  {spec.kind:<16} trait cell    ".ljust(33) + summary(cell_times))
        print(f"  {spec.kind:<16} emotion model ".ljust(33) + summary(emotion_times))

    print("\nFull matrix (35 + 1 selections, default pool):")
    baseline = None
    for jobs in (1, 2, 4):
        _, times = timed(lambda: train_matrix(features, k=5, seed=7, jobs=jobs), iterations)
        avg = sum(times) / len(times)
        baseline = baseline or avg
        print(f"  jobs={jobs}".ljust(33) + summary(times) + f"   speedup {baseline / avg:4.2f}x")

    print("\n" + "=" * 70)


if __name__ == "__main__":
    main()
