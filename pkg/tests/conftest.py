from importlib import resources

import pytest

from usagecov.files import load_model


def data_path(name: str):
    return str(resources.files("usagecov").joinpath("data", name))


@pytest.fixture(scope="session")
def demo():
    return load_model(data_path("demo_model.json"))


# --- acceptance report: one PASS/FAIL line per criterion ----------------------

_ACCEPTANCE: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, text): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    number, text = mark.args
    entry = _ACCEPTANCE.setdefault(number, [True, text, []])
    entry[0] = entry[0] and rep.passed
    entry[2].extend(v for k, v in item.user_properties if k == "detail")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, text, details = _ACCEPTANCE[number]
        suffix = f" [{'; '.join(details)}]" if details else ""
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {text}{suffix}")
