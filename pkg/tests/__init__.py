"""Tests for headmotion."""
