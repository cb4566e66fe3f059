import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from ezw.imageio import load_pgm  # noqa: E402

DATA = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture(scope="session")
def camera():
    return load_pgm(os.path.join(DATA, "camera.pgm"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def smooth_image(rng, h, w, sigma=2.0):
    """Random 8-bit image with natural-ish spatial correlation."""
    noise = rng.normal(size=(h, w))
    k = np.exp(-0.5 * (np.arange(-6, 7) / sigma) ** 2)
    k /= k.sum()
    for axis in (0, 1):
        noise = np.apply_along_axis(lambda v: np.convolve(np.concatenate([v[-6:], v, v[:6]]), k, "valid"), axis, noise)
    noise = (noise - noise.min()) / (np.ptp(noise) or 1.0)
    return (noise * 255).round().astype(np.uint8)


_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when not in ("setup", "call"):
        return
    key = (mark.args[0], item.name)
    if report.failed or key not in _CRITERIA:
        _CRITERIA[key] = (mark.args[1], "FAIL" if report.failed else "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    def order(item):
        number = str(item[0][0])
        digits = "".join(ch for ch in number if ch.isdigit())
        return int(digits), number, item[0][1]

    for (number, name), (text, status) in sorted(_CRITERIA.items(), key=order):
        terminalreporter.write_line(f"{status}  criterion {number}: {text}  [{name}]")
