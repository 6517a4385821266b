"""Shared fixtures: Gaussian blob factory and a small cached recording."""
from __future__ import annotations

import re

import numpy as np
import pytest

from semgkit.dataset import SyntheticSpec, generate_synthetic


@pytest.fixture
def make_blobs():
    """Factory for shuffled Gaussian-blob classification data."""

    def _make(
        n_per_class: int = 100,
        n_classes: int = 3,
        n_features: int = 10,
        spread: float = 1.0,
        seed: int = 0,
        center_scale: float = 4.0,
        centers: np.ndarray | None = None,
    ):
        rng = np.random.default_rng(seed)
        if centers is None:
            centers = rng.normal(0.0, center_scale, size=(n_classes, n_features))
        rows = [
            centers[c] + spread * rng.standard_normal((n_per_class, n_features))
            for c in range(n_classes)
        ]
        features = np.vstack(rows)
        labels = np.repeat(np.arange(n_classes), n_per_class)
        order = rng.permutation(features.shape[0])
        return features[order], labels[order]

    return _make


@pytest.fixture(scope="session")
def tiny_recording():
    """3-class, 6-repetition recording; every hold run yields 2 windows."""
    spec = SyntheticSpec(
        n_classes=3,
        repetitions=6,
        hold_duration=0.8,
        rest_duration=0.25,
        seed=7,
    )
    return generate_synthetic(spec)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one pass/fail line per acceptance criterion after the run."""
    lines = {}
    for status, verdict in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(status, []):
            m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
            if m is not None:
                number = int(m.group(1))
                if verdict == "FAIL" or number not in lines:
                    lines[number] = verdict
    if not lines:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(lines):
        terminalreporter.write_line(f"criterion {number:2d}: {lines[number]}")
