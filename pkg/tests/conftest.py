import numpy as np
import pytest

from lrdresid.streams import StreamKey, make_stream


@pytest.fixture
def stream():
    return make_stream(StreamKey(20240601, 0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record and assert one acceptance criterion: ``verdict(label, ok, detail)``."""
    lines = request.config.stash.setdefault(ACCEPTANCE_LINES, [])

    def report(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
