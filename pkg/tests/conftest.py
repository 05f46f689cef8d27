import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=1000,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


# -- acceptance verdicts ---------------------------------------------------------

_VERDICTS: dict[int, list[tuple[str, bool, str]]] = {}


@pytest.fixture
def verdict():
    """``verdict(criterion, part, ok, detail)`` records one checked clause."""
    def record(criterion: int, part: str, ok: bool, detail: str = "") -> None:
        _VERDICTS.setdefault(criterion, []).append((part, bool(ok), detail))
    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_VERDICTS):
        parts = _VERDICTS[n]
        status = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        body = "; ".join(f"{p} {'ok' if ok else 'FAILED'} ({d})" if d else f"{p} {'ok' if ok else 'FAILED'}"
                         for p, ok, d in parts)
        terminalreporter.write_line(f"criterion {n}: {status}  {body}")
