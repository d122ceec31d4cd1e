"""Shared fixtures/helpers and the acceptance-criteria summary block."""

from __future__ import annotations

import numpy as np
import pytest

from mtasa.model import (
    AnalysisPeriod,
    AssessmentConfig,
    RotationVariableSet,
    WeightVector,
)


def make_config(
    n_timesteps,
    variable_names,
    *,
    weights=None,
    period=None,
    rotation_vars=None,
    **overrides,
):
    """AssessmentConfig with sensible defaults for small test setups."""
    m = len(variable_names)
    if weights is None:
        weights = [1.0 / m] * m
    if period is None:
        period = range(n_timesteps)
    if rotation_vars is None:
        rotation_vars = range(m)
    return AssessmentConfig(
        measurement_vars=tuple(variable_names),
        weights=WeightVector(tuple(weights)),
        analysis_period=AnalysisPeriod(tuple(period)),
        rotation_variables=RotationVariableSet(tuple(rotation_vars)),
        **overrides,
    )


def write_long_csv(path, instances, variable_names):
    """Write {instance_id: (N, M) array-with-NaN} as long-form CSV."""
    lines = ["instance_id,time_index," + ",".join(variable_names)]
    for instance_id, values in instances.items():
        arr = np.asarray(values, dtype=float)
        for t in range(arr.shape[0]):
            cells = [
                "" if np.isnan(v) else repr(float(v)) for v in arr[t]
            ]
            lines.append(f"{instance_id},{t}," + ",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(20240813)


# --- acceptance summary -----------------------------------------------------
#
# tests/test_acceptance.py marks each test with @pytest.mark.acceptance(n,
# title); after the run a one-line PASS/FAIL/SKIP verdict per criterion is
# appended to the terminal summary.

_ACCEPTANCE_RESULTS: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(number, title): acceptance criterion metadata"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call":
        verdict = "PASS" if report.passed else "FAIL"
        _ACCEPTANCE_RESULTS[number] = (title, verdict)
    elif report.when == "setup" and report.skipped:
        _ACCEPTANCE_RESULTS[number] = (title, "SKIP")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(_ACCEPTANCE_RESULTS):
        title, verdict = _ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number} ({title}): {verdict}")
