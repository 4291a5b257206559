# criterion id -> (title, passed, detail), filled in by test_acceptance
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE_RESULTS, key=int):
        title, passed, detail = ACCEPTANCE_RESULTS[cid]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {cid:>2} {status}  {title}" + (f"  [{detail}]" if detail else ""))
