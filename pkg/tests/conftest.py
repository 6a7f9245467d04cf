"""Prints one pass/fail line per acceptance criterion after the run."""

_outcomes = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    key = props["criterion"]
    failed = report.failed or _outcomes.get(key, ("PASS",))[0] == "FAIL"
    if report.when == "call" or report.failed:
        _outcomes[key] = ("FAIL" if failed else "PASS", props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_outcomes):
        status, detail = _outcomes[key]
        line = f"{status}  {key}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
