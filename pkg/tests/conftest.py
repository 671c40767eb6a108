import numpy as np
import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def record():
    """Record one acceptance line; printed again in the terminal summary."""

    def _record(number: int, title: str, parts, extra_ok: bool = True, note: str = "") -> bool:
        """``parts`` is a list of ``(label, value, tolerance)``; each must satisfy value <= tolerance."""
        ok = extra_ok and all(value <= tol for _, value, tol in parts)
        status = "PASS" if ok else "FAIL"
        detail = "; ".join(f"{label} {value:.3e} (tol {tol:.0e})" for label, value, tol in parts)
        line = f"criterion {number:2d} {status}  {title}: {detail}{note}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
