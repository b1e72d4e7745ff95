"""Test-session plumbing: surfaces the acceptance PASS/FAIL lines.

Captured stdout of passing tests is normally hidden, so the acceptance
criterion lines are replayed in a summary section at the end of the run.
"""

import helpers


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if helpers.acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in helpers.acceptance_lines:
            terminalreporter.write_line(line)
