"""Shared test fixtures for headmotion_base tests."""

import numpy as np
import pytest

from headmotion.features import FeatureVector
from headmotion.learn import Dataset
from headmotion.session import EmotionState, ImuSample, Segment, Session, Timeline, Vec3
from headmotion.synth import generate_cohort, strong_preset


def sample(t_ms, acc=(0.0, 0.0, 1.0), gyro=(0.0, 0.0, 0.0)):
    return ImuSample(t_ms, Vec3(*acc), Vec3(*gyro))


@pytest.fixture
def two_segment_timeline():
    """Happy [0, 1000), gap, Sad [2000, 3000)."""
    return Timeline(
        (
            Segment(EmotionState.HAPPY, 0, 1000),
            Segment(EmotionState.SAD, 2000, 3000),
        )
    )


@pytest.fixture
def short_session():
    """Seven samples, three of them outside the two-segment timeline."""
    times = [0, 500, 1000, 1500, 2000, 2999, 3000]
    return Session("P042", tuple(sample(t, gyro=(float(i), 0.0, 0.0)) for i, t in enumerate(times)))


def separable_rows(n_per_class=10, labels=("no", "yes"), seed=0):
    """Rows whose every feature separates the classes by a wide margin."""
    rng = np.random.default_rng(seed)
    rows = []
    for c, label in enumerate(labels):
        for _ in range(n_per_class):
            values = 10.0 * c + rng.uniform(0.0, 1.0, size=4)
            rows.append((FeatureVector.from_array(values), label))
    return rows


@pytest.fixture
def separable_dataset():
    return Dataset.from_rows(separable_rows(), label_domain=("no", "yes"))


@pytest.fixture(scope="session")
def small_cohort():
    """Twelve strong-preset participants (fast to generate and train on)."""
    return generate_cohort(strong_preset(seed=7, n_participants=12))
