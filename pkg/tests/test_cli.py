import pytest

from fdx_sim import cli
from fdx_sim.errors import NumericalError

ARGS = ["run", "--runs", "2", "--powers", "30", "--seed", "3"]


def test_success_writes_outputs(tmp_path, capsys):
    assert cli.main(ARGS + ["--out", str(tmp_path), "--taps", "16", "--basis", "wl"]) == cli.EXIT_OK
    assert (tmp_path / "results.csv").read_text().count("\n") == 3
    assert (tmp_path / "curves.csv").exists()
    assert "wrote" in capsys.readouterr().out


@pytest.mark.parametrize("extra", [["--taps", "99"], ["--runs", "0"]])
def test_config_error_exit_code(tmp_path, extra):
    assert cli.main(ARGS + ["--out", str(tmp_path)] + extra) == cli.EXIT_CONFIG


def test_bad_config_file(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("not_a_field: 1\n")
    assert cli.main(["run", "--config", str(path), "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_config_file_used(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("n_runs: 1\ntx_powers_dbm: [22]\nn_ofdm_symbols: 1\n")
    assert cli.main(["run", "--config", str(path), "--out", str(tmp_path)]) == cli.EXIT_OK
    assert (tmp_path / "results.csv").read_text().splitlines()[1].startswith("22.0,0,0,")


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    def boom(cfg):
        raise NumericalError("singular")

    monkeypatch.setattr(cli, "monte_carlo", boom)
    assert cli.main(ARGS + ["--out", str(tmp_path)]) == cli.EXIT_NUMERICAL


def test_argparse_rejects_unknown_basis():
    with pytest.raises(SystemExit):
        cli.main(["run", "--basis", "cubic"])


def test_profile_choice_forwarded(monkeypatch, tmp_path):
    seen = {}

    def fake(cfg):
        seen["cfg"] = cfg
        return type("Sweep", (), {"curves": lambda self: []})()

    monkeypatch.setattr(cli, "monte_carlo", fake)
    monkeypatch.setattr(cli, "write_results", lambda sweep, out: ("r", "c"))
    assert cli.main(["run", "--profile", "paper", "--out", str(tmp_path)]) == cli.EXIT_OK
    assert seen["cfg"].n_runs == 1000 and seen["cfg"].n_ofdm_symbols == 200
