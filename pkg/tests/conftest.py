"""Shared test helpers and the acceptance-summary reporter.

The acceptance tests register one (name, passed, detail) row each; the
terminal-summary hook prints them as a compact pass/fail table at the end of
every run so the verdict on each headline property is visible even when all
tests pass.
"""

from __future__ import annotations

import numpy as np

from lowshot import ScoredPool

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record_acceptance(name: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS.append((name, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name} — {detail}")


def build_pool(scores, predicted, labels=None, ids=None) -> ScoredPool:
    """A ScoredPool from plain sequences, with generated ids."""
    scores = np.asarray(scores, dtype=float)
    if ids is None:
        ids = [f"it{i:04d}" for i in range(scores.size)]
    return ScoredPool(
        item_ids=ids,
        scores=scores,
        predicted=np.asarray(predicted, dtype=int),
        labels=None if labels is None else np.asarray(labels, dtype=int),
    )
