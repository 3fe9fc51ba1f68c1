import json

import numpy as np
import pytest

from bouligand_landweber import (
    GridFunction,
    RunRecord,
    build_mesh,
    read_grid_function,
    read_table_csv,
    write_grid_function,
)
from bouligand_landweber.cli import main


def test_forward_builtin_exact(tmp_path, capsys):
    out = tmp_path / "state.csv"
    assert main(["forward", "--n", "17", "--source", "builtin-exact", "--out", str(out)]) == 0
    state = read_grid_function(out)
    assert state.mesh.n_h == 17
    assert state.role == "state"
    assert np.max(np.abs(state.values)) > 0.01
    assert "ssn_iterations" in capsys.readouterr().out


def test_forward_from_file(tmp_path):
    mesh = build_mesh(9)
    src = tmp_path / "zero.csv"
    write_grid_function(src, GridFunction(mesh, np.zeros(mesh.n_interior), "source"))
    out = tmp_path / "state.csv"
    assert main(["forward", "--n", "9", "--source", str(src), "--out", str(out)]) == 0
    assert np.array_equal(read_grid_function(out).values, np.zeros(mesh.n_interior))


def test_forward_mesh_mismatch(tmp_path):
    mesh = build_mesh(9)
    src = tmp_path / "zero.csv"
    write_grid_function(src, GridFunction(mesh, np.zeros(mesh.n_interior), "source"))
    with pytest.raises(SystemExit):
        main(["forward", "--n", "17", "--source", str(src), "--out", str(tmp_path / "o.csv")])


def test_noise_free_command(tmp_path):
    out = tmp_path / "free.csv"
    rc = main(["noise-free", "--n", "17", "--start", "zero", "--iters", "3", "--out", str(out)])
    assert rc == 0
    record = RunRecord.load(tmp_path / "free")
    assert record.rel_errors[0] == 1.0
    assert len(record.residual_norms) == 4
    assert record.reason == "max-iterations"


def test_invert_command(tmp_path):
    out = tmp_path / "rec.csv"
    rc = main(
        [
            "invert",
            "--n", "17",
            "--start", "source",
            "--delta-target", "1e-2",
            "--seed", "1",
            "--out", str(out),
        ]
    )
    assert rc == 0
    record = RunRecord.load(tmp_path / "rec")
    assert record.reason == "discrepancy"
    assert record.check_discrepancy()
    assert record.delta == pytest.approx(1e-2, rel=1e-14)
    assert record.config["mu"] == 0.1
    assert record.config["tau"] == 1.4
    assert record.config["max_iter"] == 5000


def test_invert_sigma_mode(tmp_path):
    rc = main(
        [
            "invert",
            "--n", "9",
            "--start", "zero",
            "--sigma", "1e-3",
            "--seed", "2",
            "--out", str(tmp_path / "rec.csv"),
        ]
    )
    assert rc == 0
    record = RunRecord.load(tmp_path / "rec")
    assert record.delta > 0


def test_invert_requires_one_noise_flag(tmp_path):
    with pytest.raises(SystemExit):
        main(["invert", "--n", "9", "--out", str(tmp_path / "r.csv")])
    with pytest.raises(SystemExit):
        main(
            [
                "invert",
                "--n", "9",
                "--delta-target", "1e-2",
                "--sigma", "1e-2",
                "--out", str(tmp_path / "r.csv"),
            ]
        )


def test_table_command(tmp_path):
    out = tmp_path / "table.csv"
    rc = main(
        [
            "table",
            "--n", "17",
            "--start", "source",
            "--deltas", "1e-2,1e-3",
            "--seeds", "0,1",
            "--out", str(out),
        ]
    )
    assert rc == 0
    rows = read_table_csv(out)
    assert len(rows) == 4
    assert {row["seed"] for row in rows} == {0, 1}


def test_verify_oracle_suite(tmp_path):
    out = tmp_path / "oracle.csv"
    assert main(["verify", "--suite", "oracle", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n_h,trial,max_diff"
    assert len(lines) == 1 + 3 * 100
    summary = json.loads((tmp_path / "oracle.json").read_text())
    assert summary["passed"] is True
    assert summary["max_diff"] <= 1e-10


def test_verify_tcc_suite_with_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tcc_n": 17, "tcc_pairs": 3}))
    out = tmp_path / "tcc.csv"
    rc = main(["--config", str(cfg), "verify", "--suite", "tcc", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "radius,mu_hat,mismatch"
    assert len(lines) == 1 + 2 * 3  # nodal and bump modes
    summary = json.loads((tmp_path / "tcc.json").read_text())
    assert summary["max_ratio"]["nodal"] < 1.0


def test_verify_all_suites_with_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "oracle_sizes": "3,4",
                "oracle_trials": 5,
                "tcc_n": 17,
                "tcc_pairs": 2,
                "adjoint_n": 17,
                "adjoint_trials": 2,
            }
        )
    )
    out = tmp_path / "verify.csv"
    rc = main(["--config", str(cfg), "verify", "--suite", "all", "--out", str(out)])
    assert rc == 0
    for suite in ("oracle", "tcc", "adjoint"):
        assert (tmp_path / f"verify.{suite}.csv").exists()
    summaries = json.loads((tmp_path / "verify.json").read_text())
    assert [s["suite"] for s in summaries] == ["oracle", "tcc", "adjoint"]
    assert summaries[2]["max_asymmetry"] <= 1e-10


def test_config_file_defaults_and_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"iters": 2, "start": "zero"}))
    out = tmp_path / "a.csv"
    main(["--config", str(cfg), "noise-free", "--n", "9", "--out", str(out)])
    assert len(RunRecord.load(tmp_path / "a").residual_norms) == 3  # iters from config
    out2 = tmp_path / "b.csv"
    main(["--config", str(cfg), "noise-free", "--n", "9", "--iters", "1", "--out", str(out2)])
    assert len(RunRecord.load(tmp_path / "b").residual_norms) == 2  # flag wins
