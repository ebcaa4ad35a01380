"""Exit-code mapping for numerical self-check failures."""

from csbmlab import NumericalConsistencyError
from csbmlab.expcli import cli


def test_numerical_consistency_maps_to_exit_3(monkeypatch, capsys):
    def boom(config):
        raise NumericalConsistencyError("synthetic failure")

    monkeypatch.setitem(cli._EXPERIMENT_RUNNERS, "validate", boom)
    rc = cli.main(["validate", "--trials", "5000"])
    assert rc == 3
    assert "numerical consistency" in capsys.readouterr().err
