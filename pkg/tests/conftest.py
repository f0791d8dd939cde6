"""Shared window fixtures and the acceptance-criteria summary hook."""
from __future__ import annotations

import pytest

from leftschemes import build_window, rearrange

_ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def _criterion_key(name: str) -> tuple[int, str]:
    digits = "".join(ch for ch in name if ch.isdigit())
    return (int(digits) if digits else 0, name)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=_criterion_key):
        ok, detail = _ACCEPTANCE[name]
        line = "criterion %-3s %s" % (name + ":", "PASS" if ok else "FAIL")
        if detail:
            line += "  (%s)" % detail
        terminalreporter.write_line(line)


@pytest.fixture
def record():
    """Log one acceptance criterion outcome for the terminal summary."""

    def _rec(criterion, ok: bool, detail: str = "") -> bool:
        _ACCEPTANCE[str(criterion)] = (bool(ok), detail)
        return bool(ok)

    return _rec


@pytest.fixture(scope="session")
def heis_desk():
    return build_window("heisenberg")


@pytest.fixture(scope="session")
def heis_desk_rearranged(heis_desk):
    return rearrange(heis_desk)


@pytest.fixture(scope="session")
def heis_small():
    return build_window("heisenberg", n_max=2)


@pytest.fixture(scope="session")
def heis_small_rearranged(heis_small):
    return rearrange(heis_small)


@pytest.fixture(scope="session")
def wreath_desk():
    return build_window("wreath")


@pytest.fixture(scope="session")
def bs_desk():
    return build_window("bs", d=2)
