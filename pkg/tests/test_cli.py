import json

import numpy as np
import pytest

from qball.analysis import FIG2_CHARGES
from qball.cli import ConfigError, figure_recipes, main, parse_config
from qball.functionals import diagnose
from qball.io import profile_from_csv, read_csv, read_manifest, sha256_file, write_csv
from qball.potentials import parse_potential

FAST = ["--M", "400", "--r-max", "40"]


def test_defaults_filled():
    cfg = parse_config(["solve", "--potential", "gamma", "--charge", "300"], env={})
    assert cfg["charge"] == 300.0 and cfg["M"] == 2000 and cfg["n"] == 2
    assert cfg.provenance["charge"] == "flag" and cfg.provenance["M"] == "default"
    assert str(cfg.output_dir).endswith("solve")


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--charge", "-5"],
        ["solve", "--charge", "abc"],
        ["solve", "--M", "10"],
        ["solve", "--potential", "nonalpha_beta:a=3"],
        ["solve", "--guess", "triangle"],
        ["solve", "--dt", "1e-4", "--dt-factor", "0.5"],
        ["sweep", "--charges", "10,5"],
        ["sweep", "--jobs", "2"],
        ["classify", "--sigma-lo", "50", "--sigma-hi", "10"],
        ["boost", "--v", "1,0"],
        ["evolve", "--perturbation", "0.5"],
        ["evolve", "--periods", "500"],
        [],
    ],
)
def test_invalid_configs(argv):
    with pytest.raises(ConfigError):
        parse_config(argv, env={})


def test_file_then_flag(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("# comment\ndt = 1e-4\ncharge = 50   # trailing\npotential = alpha_beta:a=2.5\n")
    cfg = parse_config(["solve", "--config", str(f), "--dt", "2e-4"], env={})
    assert cfg["dt"] == 2e-4 and cfg.provenance["dt"] == "flag"
    assert cfg["charge"] == 50 and cfg.provenance["charge"] == "file"
    assert cfg["potential"] == "alpha_beta:a=2.5"


@pytest.mark.parametrize("text", ["bogus = 1\n", "charge\n", "charge = 1\ncharge = 2\n"])
def test_bad_config_file(tmp_path, text):
    f = tmp_path / "bad.cfg"
    f.write_text(text)
    with pytest.raises(ConfigError):
        parse_config(["solve", "--config", str(f)], env={})


def test_aliases():
    cfg = parse_config(["solve", "--dim", "3", "--rmax", "20", "--nodes", "500", "--tol-omega", "1e-7"], env={})
    assert (cfg["n"], cfg["r_max"], cfg["M"], cfg["e_omega"]) == (3, 20.0, 500, 1e-7)


def test_env_output_dir(tmp_path):
    cfg = parse_config(["lambda0"], env={"QBALL_OUTPUT_DIR": str(tmp_path)})
    assert cfg.output_dir == tmp_path and cfg.provenance["output_dir"] == "env"


def test_solve_outputs_and_round_trip(tmp_path, capsys):
    out = tmp_path / "s"
    assert main(["solve", "--charge", "300", *FAST, "--output-dir", str(out)]) == 0
    cols = read_csv(out / "profile.csv")
    assert list(cols) == ["r", "u", "rho_E", "rho_H", "rho_B"]
    m = read_manifest(out / "manifest.json")
    assert m["files"] == [{"path": "profile.csv", "sha256": sha256_file(out / "profile.csv")}]
    assert m["config"]["charge"] == 300.0 and m["provenance"]["charge"] == "flag"
    sol = m["diagnostics"]["solution"]
    u = profile_from_csv(out / "profile.csv", n=2)
    d = diagnose(u, sol["omega"], parse_potential("gamma"))
    for key in ("E", "H", "Lambda", "Gamma", "sup_norm"):
        assert d.as_dict()[key] == pytest.approx(sol[key], rel=1e-12)
    assert "converged" in capsys.readouterr().out


def test_deterministic_outputs(tmp_path):
    for name in ("a", "b"):
        assert main(["solve", "--charge", "100", *FAST, "--output-dir", str(tmp_path / name)]) == 0
    assert (tmp_path / "a" / "profile.csv").read_bytes() == (tmp_path / "b" / "profile.csv").read_bytes()


def test_exit_codes(tmp_path):
    assert main(["solve", "--charge", "-5"]) == 2
    strict = ["solve", "--charge", "300", *FAST, "--max-steps", "10", "--check-every", "10"]
    assert main([*strict, "--strict", "--output-dir", str(tmp_path / "x")]) == 3
    assert main([*strict, "--output-dir", str(tmp_path / "y")]) == 0
    assert main(["solve", "--charge", "300", *FAST, "--dt", "10", "--output-dir", str(tmp_path / "z")]) == 4
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["lambda0", "--output-dir", str(blocker / "sub")]) == 5


def test_lambda0_command(tmp_path, capsys):
    assert main(["lambda0", "--potential", "nonalpha_beta:a=1", "--output-dir", str(tmp_path)]) == 0
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert m["diagnostics"]["lambda0"]["lambda0"] == pytest.approx(7 / 9, abs=1e-10)
    assert "0.7777" in capsys.readouterr().out


def test_sweep_command(tmp_path):
    out = tmp_path / "sw"
    argv = ["sweep", "--charges", "100,200", *FAST, "--profiles", "--output-dir", str(out)]
    assert main(argv) == 0
    cols = read_csv(out / "sweep.csv")
    assert list(cols) == ["sigma", "omega", "Lambda", "E", "H", "Gamma", "alpha", "sup_norm", "pohozaev_residual", "converged"]
    assert cols["omega"][1] < cols["omega"][0]
    assert (out / "profiles" / "sigma_100.csv").exists()
    listed = {f["path"] for f in read_manifest(out / "manifest.json")["files"]}
    assert listed == {"sweep.csv", "profiles/sigma_100.csv", "profiles/sigma_200.csv"}


def test_boost_command(tmp_path):
    out = tmp_path / "b"
    argv = ["boost", "--charge", "300", *FAST, "--spacing", "0.1", "--output-dir", str(out)]
    assert main(argv) == 0
    cols = read_csv(out / "field.csv")
    assert list(cols) == ["x1", "x2", "re", "im", "abs"]
    np.testing.assert_allclose(np.hypot(cols["re"], cols["im"]), cols["abs"], rtol=1e-14)
    summary = read_manifest(out / "manifest.json")["diagnostics"]["boost"]
    assert summary["width_ratio"] == pytest.approx(summary["gamma"], abs=0.1)


def test_evolve_command(tmp_path):
    out = tmp_path / "e"
    assert main(["evolve", "--charge", "300", *FAST, "--periods", "2", "--output-dir", str(out)]) == 0
    cols = read_csv(out / "ledger.csv")
    assert list(cols) == ["t", "E", "H", "deviation", "localization_radius"]
    assert len(cols["t"]) == 3


def test_csv_full_precision(tmp_path):
    x = np.array([np.pi, 1 / 3, 1e-300, -2.5e17])
    write_csv(tmp_path / "x.csv", {"x": x})
    np.testing.assert_array_equal(read_csv(tmp_path / "x.csv")["x"], x)
    with pytest.raises(ValueError):
        write_csv(tmp_path / "y.csv", {"a": [1, 2], "b": [1]})


def test_figure_recipes():
    rec = figure_recipes()
    assert set(rec) == {"fig1", "fig2", "fig3", "fig4"}
    fig2 = rec["fig2"][0]
    assert fig2[fig2.index("--charges") + 1] == ",".join(str(c) for c in FIG2_CHARGES)
    assert len(FIG2_CHARGES) == 15
    fig1 = rec["fig1"][0]
    assert fig1[fig1.index("--v") + 1] == "0.9,0" and fig1[fig1.index("--charge") + 1] == "300"
    assert fig1[fig1.index("--potential") + 1] == "gamma"
    pots = {cmd[cmd.index("--potential") + 1] for cmd in rec["fig3"]}
    assert pots == {"alpha_beta:a=2.5", "alpha_nonbeta", "nonalpha_beta:a=1", "gamma"}
    for cmd in rec["fig1"] + rec["fig2"] + rec["fig3"] + rec["fig4"]:
        parse_config(cmd, env={})


def test_recipes_flag(capsys):
    assert main(["--recipes"]) == 0
    assert "fig2: qball sweep" in capsys.readouterr().out
