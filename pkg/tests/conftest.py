import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

_CRITERIA: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    label = marker.args[0]
    if hasattr(item, "callspec"):
        label = f"{label} [{item.callspec.id}]"
    detail = dict(item.user_properties).get("detail", "")
    _CRITERIA.append((label, "PASS" if report.passed else "FAIL", detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, status, detail in _CRITERIA:
        terminalreporter.write_line(f"{status}  {label}" + (f"  ({detail})" if detail else ""))
