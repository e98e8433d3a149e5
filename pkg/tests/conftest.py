import os
from pathlib import Path

import numpy as np
import pytest

import synth
from icardo.data import encode_labels, load_csv

ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def alizadeh_path(tmp_path_factory):
    return synth.alizadeh_csv(tmp_path_factory.mktemp("ali") / "alizadeh.csv")


@pytest.fixture(scope="session")
def alizadeh(alizadeh_path):
    return encode_labels(load_csv(alizadeh_path, "alizadeh56"))


@pytest.fixture(scope="session")
def uci_path(tmp_path_factory):
    return synth.uci_csv(tmp_path_factory.mktemp("uci") / "uci.csv")


@pytest.fixture(scope="session")
def uci(uci_path):
    return encode_labels(load_csv(uci_path, "uci13"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def data_dir() -> Path:
    return Path(os.environ.get("ICARDO_DATA_DIR", ROOT / "data"))


# -- one pass/fail line per acceptance criterion ---------------------------

_CRITERIA: dict[str, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion a test belongs to")


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _CRITERIA.setdefault(crit, []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_CRITERIA, key=lambda c: int(c.split(".")[0])):
        ok = all(_CRITERIA[crit])
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {crit}")


def pytest_collection_modifyitems(items):
    # tagged at collection so setup errors in shared fixtures still count
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            item.user_properties.append(("criterion", marker.args[0]))


@pytest.fixture(scope="session")
def full_report(alizadeh):
    """The default 112-cell grid on the synthetic 303 x 56 table (about 1.5 minutes)."""
    from icardo.harness import GridConfig, run_grid
    return run_grid(alizadeh, GridConfig())
