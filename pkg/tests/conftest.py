from hypothesis import settings

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")

# filled by tests/test_acceptance.py, one entry per criterion
ACCEPTANCE_RESULTS: dict[str, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (outcome, detail) in ACCEPTANCE_RESULTS.items():
        terminalreporter.write_line(f"{outcome}  {name}" + (f"  ({detail})" if detail else ""))
