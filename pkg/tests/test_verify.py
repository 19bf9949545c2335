import pytest

from harness.cli import main
from harness.verify import SUITES, run_suite


@pytest.mark.parametrize("suite", sorted(SUITES))
def test_suite_passes(suite):
    checks, timings = run_suite(suite)
    failed = [c for c in checks if not c.passed]
    assert not failed, failed
    assert all(c.anchor for c in checks)


def test_exact_suite_is_fast():
    _, timings = run_suite("exact")
    assert timings["exact"] < 10.0


def test_oracle_suite_has_convergence_chain():
    checks, _ = run_suite("oracle")
    assert any("strictly decreasing" in c.name for c in checks)


def test_verify_all_exit_code(capsys):
    assert main(["verify", "all"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nope")
