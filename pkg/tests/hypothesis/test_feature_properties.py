"""
Property-based tests for magnitudes and segment moments.

The numpy implementation is checked against a plain-Python oracle, and the
magnitude against the geometric properties any norm must have. featurize is
compared with a per-emotion brute force on random labeled sessions.
"""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from headmotion.features import featurize, magnitude, magnitudes, moments
from headmotion.session import EMOTIONS, ImuSample, LabeledSession, Vec3

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)
vectors = st.builds(Vec3, finite, finite, finite)
series = st.lists(finite, min_size=1, max_size=200)


def oracle_moments(values, ddof):
    n = len(values)
    mean = math.fsum(values) / n
    if n <= ddof:
        return mean, 0.0
    return mean, math.sqrt(math.fsum((v - mean)**2 for v in values) / (n - ddof))


class TestMoments:
    @given(series, st.sampled_from([0, 1]))
    def test_matches_oracle(self, values, ddof):
        mean, std = moments(values, ddof)
        expected_mean, expected_std = oracle_moments(values, ddof)
        assert math.isclose(mean, expected_mean, rel_tol=1e-12, abs_tol=1e-9)
        assert math.isclose(std, expected_std, rel_tol=1e-9, abs_tol=1e-9)

    @given(series)
    def test_std_is_non_negative_and_bounded_by_range(self, values):
        _, std = moments(values)
        assert 0.0 <= std <= (max(values) - min(values)) + 1e-9

    @given(series, finite)
    def test_shift_moves_mean_not_std(self, values, offset):
        mean, std = moments(values)
        shifted_mean, shifted_std = moments([v + offset for v in values])
        assert math.isclose(shifted_mean, mean + offset, rel_tol=1e-9, abs_tol=1e-6)
        assert math.isclose(shifted_std, std, rel_tol=1e-6, abs_tol=1e-6)

    @given(st.lists(finite, min_size=2, max_size=50))
    def test_sample_std_at_least_population_std(self, values):
        assert moments(values, ddof=1)[1] >= moments(values, ddof=0)[1]


class TestMagnitude:
    @given(vectors)
    def test_non_negative_and_zero_only_at_origin(self, v):
        m = magnitude(v)
        assert m >= 0.0
        assert (m == 0.0) == (v.as_list() == [0.0, 0.0, 0.0])

    @given(vectors, st.floats(min_value=-100, max_value=100, allow_nan=False))
    def test_homogeneous(self, v, c):
        scaled = Vec3(c * v.x, c * v.y, c * v.z)
        assert math.isclose(magnitude(scaled), abs(c) * magnitude(v), rel_tol=1e-12, abs_tol=1e-9)

    @given(vectors, vectors)
    def test_triangle_inequality(self, a, b):
        total = Vec3(a.x + b.x, a.y + b.y, a.z + b.z)
        assert magnitude(total) <= magnitude(a) + magnitude(b) + 1e-9

    @given(st.lists(vectors, min_size=1, max_size=30))
    def test_vectorized_agrees_with_scalar(self, vs):
        rows = np.array([v.as_list() for v in vs])
        expected = [magnitude(v) for v in vs]
        np.testing.assert_allclose(magnitudes(rows), expected, rtol=1e-12, atol=1e-9)


# =============================================================================
# featurize against a per-emotion brute-force oracle
# =============================================================================

readings = st.tuples(vectors, vectors)


@st.composite
def labeled_sessions(draw):
    """Random LabeledSession: 1..5 emotions, each with 2..25 samples, interleaved."""
    present = draw(st.lists(st.sampled_from(EMOTIONS), min_size=1, max_size=5, unique=True))
    rows = []
    for emotion in present:
        for acc, gyro in draw(st.lists(readings, min_size=2, max_size=25)):
            rows.append((acc, gyro, emotion))
    rows = draw(st.permutations(rows))
    labeled = tuple(
        (ImuSample(i * 1000, acc, gyro), emotion) for i, (acc, gyro, emotion) in enumerate(rows)
    )
    return LabeledSession("P001", labeled)


def oracle_features(session):
    groups = {}
    for sample, emotion in session.labeled:
        groups.setdefault(emotion, []).append(sample)
    out = {}
    for emotion, samples in groups.items():
        acc = [math.sqrt(s.acc.x**2 + s.acc.y**2 + s.acc.z**2) for s in samples]
        gyro = [math.sqrt(s.gyro.x**2 + s.gyro.y**2 + s.gyro.z**2) for s in samples]
        out[emotion] = oracle_moments(acc, 0) + oracle_moments(gyro, 0)
    return out


def assert_same_features(got, expected):
    assert set(got) == set(expected)
    for emotion, values in expected.items():
        # 1e-12 relative to the largest magnitude in play
        scale = 1.0 + max(abs(v) for v in values)
        for actual, wanted in zip(got[emotion].as_array(), values):
            assert math.isclose(actual, wanted, rel_tol=1e-12, abs_tol=1e-12 * scale), emotion


class TestFeaturize:
    @given(labeled_sessions())
    @settings(max_examples=60, deadline=None)
    def test_matches_per_emotion_oracle(self, session):
        assert_same_features(featurize(session), oracle_features(session))

    @given(labeled_sessions(), st.randoms(use_true_random=False))
    @settings(max_examples=60, deadline=None)
    def test_sample_order_does_not_matter(self, session, rng):
        shuffled = list(session.labeled)
        rng.shuffle(shuffled)
        reordered = featurize(LabeledSession(session.participant_id, shuffled))
        expected = {e: tuple(v.as_array()) for e, v in featurize(session).items()}
        assert_same_features(reordered, expected)

    @given(labeled_sessions())
    @settings(max_examples=30, deadline=None)
    def test_only_present_emotions_appear(self, session):
        assert list(featurize(session)) == session.emotions()
