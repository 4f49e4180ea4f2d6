import os

# worker count is read lazily; pin it so thread-dependent paths are exercised the same way everywhere
os.environ.setdefault("QFOUND_THREADS", "4")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])
