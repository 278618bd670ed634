import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sarfeas.config import bundled_config_path, load_config, parse_config  # noqa: E402


@pytest.fixture(scope="session")
def fixture_path():
    return bundled_config_path()


@pytest.fixture(scope="session")
def scenario(fixture_path):
    return load_config(fixture_path)


@pytest.fixture
def raw_config(fixture_path):
    return json.loads(Path(fixture_path).read_text())


@pytest.fixture
def make_scenario(raw_config):
    def build(**sections):
        for key, value in sections.items():
            raw_config[key] = value
        return parse_config(raw_config)

    return build


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(cid, label): exit criterion, reported in the summary")
    config._acceptance_lines = []


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when != "call":
        return
    cid, label = marker.args
    status = "PASS" if call.excinfo is None else "FAIL"
    item.config._acceptance_lines.append(f"[{status}] criterion {cid}: {label} ({call.duration:.1f} s)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
