import pytest

from _support import tiered_matrix_values, write_wide_csv


@pytest.fixture
def channel_csv(tmp_path):
    """Thirteen tier-shaped channels, 600 samples each, labelled ch1..ch13."""
    values, _ = tiered_matrix_values(n=600, seed=3)
    labels = ["culture"] + [f"ch{i}" for i in range(2, 14)]
    path = tmp_path / "channels.csv"
    write_wide_csv(path, values, labels, index=True)
    return path


def pytest_terminal_summary(terminalreporter):
    from _support import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
