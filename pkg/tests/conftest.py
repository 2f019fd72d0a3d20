"""Shared pytest plumbing: collect acceptance-criterion verdict lines."""

_criterion_lines = []


def record_criterion(line: str) -> None:
    """Stash a criterion verdict for the end-of-run summary block."""
    _criterion_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in _criterion_lines:
            terminalreporter.line(line)
