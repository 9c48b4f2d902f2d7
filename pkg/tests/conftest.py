import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from toric_ladder.lattice import build_ladder  # noqa: E402

# (visons) for the three reference quenches, spinon on star 1
CASES = {"i": (), "ii": (2,), "iii": (3,)}


@pytest.fixture(scope="session")
def ladder3():
    return build_ladder(3, 1.0, 0.1)


@pytest.fixture(scope="session")
def ladder2():
    return build_ladder(2, 1.0, 0.1)


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion; printed in the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(label, checks, elapsed, limit):
        checks = dict(checks)
        checks[f"runtime {elapsed:.1f}s < {limit:g}s"] = elapsed < limit
        ok = all(checks.values())
        failed = [k for k, v in checks.items() if not v]
        line = f"{'PASS' if ok else 'FAIL'}  {label}"
        if failed:
            line += "  [failed: " + "; ".join(failed) + "]"
        lines.append(line)
        print(line)
        assert ok, line

    return record


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
