import subprocess
import sys

import pytest

from excitonium.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main
from excitonium.trajectory import read_csv


def _body(path):
    return "".join(line for line in path.read_text().splitlines(True)
                   if not line.startswith("# created"))


def test_run_writes_csv_and_svg(tmp_path, capsys):
    code = main(["run", "--preset", "fig2", "--temp", "300", "--horizon", "20",
                 "--out", str(tmp_path), "--svg"])
    assert code == EXIT_OK
    csv = tmp_path / "fig2_heom_site1_300K.csv"
    meta, cols, data = read_csv(csv)
    assert meta["status"] == "ok" and "created" in meta
    assert data.shape[0] == 21
    svg = (tmp_path / "fig2_heom_site1_300K.svg").read_text()
    assert svg.lstrip().startswith("<?xml") and "<svg" in svg
    assert str(csv) in capsys.readouterr().out


def test_run_is_reproducible(tmp_path):
    args = ["run", "--temp", "77", "--horizon", "15", "--depth", "2"]
    assert main(args + ["--out", str(tmp_path / "a"), "--workers", "1"]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b"), "--workers", "3"]) == EXIT_OK
    a = _body(tmp_path / "a" / "heom_site1_77K.csv")
    b = _body(tmp_path / "b" / "heom_site1_77K.csv")
    assert a == b


def test_svg_is_reproducible(tmp_path):
    for d in ("a", "b"):
        main(["run", "--solver", "redfield-secular", "--horizon", "10", "--svg",
              "--no-timestamp", "--out", str(tmp_path / d)])
    name = "redfield-secular_site1_77K"
    assert (tmp_path / "a" / f"{name}.svg").read_text() == (tmp_path / "b" / f"{name}.svg").read_text()
    assert (tmp_path / "a" / f"{name}.csv").read_text() == (tmp_path / "b" / f"{name}.csv").read_text()


def test_all_variants(tmp_path):
    code = main(["run", "--preset", "fig4", "--all-variants", "--horizon", "5",
                 "--solver", "redfield-secular", "--out", str(tmp_path)])
    assert code == EXIT_OK
    names = sorted(p.name for p in tmp_path.glob("*.csv"))
    assert names == ["fig4_redfield-secular_site6_300K.csv", "fig4_redfield-secular_site6_77K.csv"]


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[bath]\ntemperature = 0\n")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "bath.temperature" in capsys.readouterr().err
    assert main(["run", "--preset", "nope"]) == EXIT_CONFIG
    assert main(["validate", "--config", str(tmp_path / "missing.ini")]) == EXIT_CONFIG
    assert main(["run", "--all-variants"]) == EXIT_CONFIG


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["run", "--solver", "lindblad"])
    assert info.value.code == 2


def test_numerical_failure_writes_partial_csv(tmp_path, capsys):
    code = main(["run", "--temp", "300", "--dt", "200", "--horizon", "2000",
                 "--depth", "2", "--out", str(tmp_path)])
    assert code == EXIT_NUMERICAL
    meta, _, data = read_csv(tmp_path / "heom_site1_300K.csv")
    assert meta["status"].startswith("failed")
    assert 1 <= data.shape[0] < 11
    assert "numerical failure" in capsys.readouterr().err


def test_compare(tmp_path, capsys):
    code = main(["compare", "--temp", "300", "--horizon", "100", "--depth", "2",
                 "--solvers", "heom,redfield-secular", "--out", str(tmp_path), "--svg"])
    assert code == EXIT_OK
    stem = tmp_path / "compare_site1_300K"
    meta, cols, data = read_csv(stem.with_suffix(".csv"))
    assert meta["solvers"] == "heom,redfield-secular"
    assert "E_heom" in cols and "E_redfield-secular" in cols
    assert (tmp_path / "compare_site1_300K_summary.csv").is_file()
    assert (tmp_path / "compare_site1_300K.svg").is_file()
    assert "t = 100 fs" in capsys.readouterr().out
    assert main(["compare", "--solvers", "heom", "--horizon", "5"]) == EXIT_CONFIG


def test_sweep(tmp_path):
    code = main(["sweep", "--solver", "redfield-secular", "--horizon", "10", "--axis",
                 "temperature", "--values", "77,300", "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert len(list(tmp_path.glob("*.csv"))) == 2
    assert len(list(tmp_path.glob("*_manifest.json"))) == 1
    assert main(["sweep", "--axis", "depth", "--values", ",", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_presets_and_validate(tmp_path, capsys):
    assert main(["presets"]) == EXIT_OK
    out = capsys.readouterr().out
    for name in ("fig2", "fig3", "fig4", "figS1", "figS2", "figS3"):
        assert f"{name}:" in out
    assert main(["presets", "fig9"]) == EXIT_CONFIG
    cfg = tmp_path / "ok.ini"
    cfg.write_text("[system]\ninitial_site = 6\n")
    assert main(["validate", "--config", str(cfg)]) == EXIT_OK
    assert "heom_site6_77K" in capsys.readouterr().out
    cfg.write_text("[system]\ninitial_site = 9\n")
    assert main(["validate", "--config", str(cfg)]) == EXIT_CONFIG
    assert main(["validate", "--preset", "figS3"]) == EXIT_OK


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "excitonium", "presets", "fig2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("fig2:")
