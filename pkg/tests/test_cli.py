import json
import math

from halfspec import __version__
from halfspec.cli import main, read_csv


def run(tmp_path, *argv, config=None, name="out"):
    out = tmp_path / name
    args = list(argv) + ["--out", str(out)]
    if config is not None:
        cfg = tmp_path / f"{name}.json"
        cfg.write_text(config if isinstance(config, str) else json.dumps(config))
        args += ["--config", str(cfg)]
    return main(args), out


def test_malformed_config_exit_1(tmp_path):
    code, _ = run(tmp_path, "solve", config="{not json")
    assert code == 1


def test_unknown_subcommand_exit_1(tmp_path):
    assert main(["frobnicate", "--out", str(tmp_path)]) == 1


def test_bad_equation_exit_1(tmp_path):
    code, _ = run(tmp_path, "solve", config={"equation": {"name": "no_such_equation"}})
    assert code == 1


def test_solver_error_exit_2(tmp_path):
    data = {"components": 1, "atoms": [{"xi": ["0"], "coeff": ["1"]}]}
    code, out = run(tmp_path, "solve", config={"data": data})
    assert code == 2
    assert "error" in json.loads((out / "error.json").read_text())


def test_property_failure_exit_3(tmp_path):
    cfg = {"solver": {"kind": "grid", "h": 0.25, "extent": 4.0, "T": 1.0, "dt": 0.25, "max_iters": 1}}
    code, out = run(tmp_path, "solve", config=cfg)
    assert code == 3
    assert (out / "failures.json").exists()


def test_lattice_solve_outputs(tmp_path):
    code, out = run(tmp_path, "solve", "--max-level", "5")
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["atoms"] == 5 and summary["residual"]["ok"]
    header, rows = read_csv(out / "samples.csv")
    assert header == ["t", "xi1", "component", "re", "im"]
    # zero atoms are dropped from snapshots: one atom at t = 0, five later
    assert len(rows) == 11


def test_csv_metadata_and_crlf(tmp_path):
    code, out = run(tmp_path, "solve", "--max-level", "3")
    assert code == 0
    raw = (out / "samples.csv").read_bytes()
    first, second = raw.split(b"\r\n")[:2]
    assert first.startswith(b"# halfspec " + __version__.encode())
    assert b"cutoff table" in first
    assert second == b"t,xi1,component,re,im"


def test_byte_identical_reruns(tmp_path):
    cfg = {"weights": {"trials": 1, "pairs": 50}}
    c1, o1 = run(tmp_path, "weights", "--seed", "7", config=cfg, name="a")
    c2, o2 = run(tmp_path, "weights", "--seed", "7", config=cfg, name="b")
    assert c1 == c2 == 0
    assert (o1 / "conditions.csv").read_bytes() == (o2 / "conditions.csv").read_bytes()
    c3, o3 = run(tmp_path, "solve", "--kind", "grid", "--T", "1", "--dt", "0.1", name="g1")
    c4, o4 = run(tmp_path, "solve", "--kind", "grid", "--T", "1", "--dt", "0.1", name="g2")
    assert c3 == c4 == 0
    for f in ("norm_trace.csv", "samples.csv"):
        assert (o3 / f).read_bytes() == (o4 / f).read_bytes()


def test_threads_do_not_change_output(tmp_path):
    c1, o1 = run(tmp_path, "burgers", "--a", "5", "--a", "10", "--N", "30", name="t1")
    c2, o2 = run(tmp_path, "burgers", "--a", "5", "--a", "10", "--N", "30", "--threads", "2", name="t2")
    assert c1 == c2 == 0
    for f in ("tstar.csv", "astar.csv", "un.csv"):
        assert (o1 / f).read_bytes() == (o2 / f).read_bytes()


def test_burgers_tstar_below_log(tmp_path):
    code, out = run(tmp_path, "burgers", "--a", "10", "--N", "60")
    assert code == 0
    header, rows = read_csv(out / "tstar.csv")
    row = dict(zip(header, rows[0]))
    assert float(row["a"]) == 10
    assert float(row["estimate"]) <= math.log(10) + 1e-9


def test_oracle_default(tmp_path):
    code, out = run(tmp_path, "oracle")
    assert code == 0
    header, rows = read_csv(out / "picard.csv")
    assert len(rows) > 0
    assert (out / "cosine.csv").exists()


def test_cascade_and_residual(tmp_path):
    code, out = run(tmp_path, "cascade", "--N", "8")
    assert code == 0
    header, _ = read_csv(out / "cascade.csv")
    assert {"lower_bound", "f_lower", "f_upper", "upper_bound"} <= set(header)
    code, out = run(tmp_path, "residual", "--name", "clm", name="res")
    assert code == 0
    header, rows = read_csv(out / "residual.csv")
    assert float(dict(zip(header, rows[0]))["residual_at_quoted"]) <= 1e-12


def test_plot_svg(tmp_path):
    code, out = run(tmp_path, "solve", "--kind", "grid", "--T", "1", "--dt", "0.1")
    assert code == 0
    code, _ = run(tmp_path, "plot", "--csv", str(out / "norm_trace.csv"), "--x", "t", "--y", "z_norm",
                  "--y", "ball_bound", name="plot")
    assert code == 0
    svg = (tmp_path / "plot" / "norm_trace.svg").read_text()
    assert svg.startswith("<svg")
    assert svg.count("<polyline") == 2


def test_plot_missing_column(tmp_path):
    code, out = run(tmp_path, "solve", "--max-level", "2")
    code, _ = run(tmp_path, "plot", "--csv", str(out / "samples.csv"), "--y", "nope", name="plot")
    assert code == 1
