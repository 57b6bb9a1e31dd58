import textwrap

import pytest

TINY = """\
name: tiny
seed: 1
train_len: 60
test_len: 20
trials: 2
eval_every: 20
noise: {model: sas, alpha: 1.4, snr_db: 15}
filters:
  KLMS: {algorithm: KLMS, step_size: 0.1}
  QVP: {algorithm: QVPKRMN, step_size: 0.1, epsilon_u: 2.0, mixing: {delta: 0.999, theta: 0.01, beta: 0.9}}
"""


@pytest.fixture
def tiny_config(tmp_path):
    path = tmp_path / "tiny.yaml"
    path.write_text(textwrap.dedent(TINY))
    return path


def pytest_terminal_summary(terminalreporter):
    import sys

    acceptance = sys.modules.get("test_acceptance")
    results = getattr(acceptance, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
