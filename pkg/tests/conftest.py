def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance")
    for num, (passed, detail) in sorted(test_acceptance.RESULTS.items()):
        terminalreporter.write_line(f"criterion {num}: {'PASS' if passed else 'FAIL'} {detail}")
