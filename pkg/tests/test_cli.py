"""End-to-end checks of the manifest-driven command line front end.

Everything runs through ``main(argv)`` in-process; no subprocesses, so the
exit codes and stderr text are asserted directly.
"""

import json
import os
import re

import numpy as np
import pytest

from secrecy_sor.cli import main

# main-lobe radius of the reference broadside setup (N_t=100, R_th=10,
# d_b=100 m) with the whole budget on the data signal; frozen from
# sor_boundary_nojam at theta=0
MAIN_RADIUS_NOJAM = 1044.8555257055427


def write_manifest(path, **blocks):
    path.write_text(json.dumps(blocks))
    return str(path)


def read_csv(path):
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:]]
    return header, rows


def base_manifest(tmp_path, **extra):
    blocks = {
        "scenario": {"n_antennas": 100, "r_th": 10.0, "bob_dist_m": 100.0,
                     "n_eves": 10},
        "region": {"angles_deg": [-15.0, 15.0], "d_min_m": 50.0,
                   "d_max_m": 100.0},
        "sweep": {"parameter": "phi", "grid": [0.0, 0.3, 0.6]},
        "scheme": "uniform",
    }
    blocks.update(extra)
    return write_manifest(tmp_path / "manifest.json", **blocks)


def test_reproduce_fig2_values(tmp_path, capsys):
    out = tmp_path / "fig2.csv"
    rc = main(["reproduce", "fig2", "--out", str(out), "--phi-step", "0.2"])
    assert rc == 0
    header, rows = read_csv(out)
    assert header == ["alpha", "phi"] + [f"lobe{m}_m" for m in range(7)] \
        + ["warning"]
    first = rows[0]
    assert float(first[0]) == 3.0 and float(first[1]) == 0.0
    assert float(first[2]) == pytest.approx(MAIN_RADIUS_NOJAM, rel=1e-8)
    # side lobes are strictly inside the main lobe without jamming
    radii = [float(v) for v in first[2:9]]
    assert all(radii[m] < radii[0] for m in range(1, 7))
    err = capsys.readouterr().err
    assert "reproduce fig2: wrote" in err


def test_manifest_error_unknown_field(tmp_path, capsys):
    path = base_manifest(tmp_path)
    blocks = json.loads((tmp_path / "manifest.json").read_text())
    blocks["scenario"]["n_antenas"] = 64  # typo on purpose
    (tmp_path / "manifest.json").write_text(json.dumps(blocks))
    rc = main(["sop", "--manifest", path, "--out", str(tmp_path / "o.csv")])
    assert rc == 2
    err = capsys.readouterr().err
    assert err.startswith("manifest error at scenario.n_antenas:")


def test_manifest_error_empty_grid(tmp_path, capsys):
    path = base_manifest(tmp_path, sweep={"parameter": "phi", "grid": []})
    rc = main(["sop", "--manifest", path, "--out", str(tmp_path / "o.csv")])
    assert rc == 2
    assert "sweep.grid: empty sweep grid" in capsys.readouterr().err


def test_manifest_error_missing_file(tmp_path, capsys):
    rc = main(["sop", "--manifest", str(tmp_path / "nope.json"),
               "--out", str(tmp_path / "o.csv")])
    assert rc == 2
    assert "manifest error at manifest: cannot read" \
        in capsys.readouterr().err


def test_manifest_error_bad_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    rc = main(["sop", "--manifest", str(bad),
               "--out", str(tmp_path / "o.csv")])
    assert rc == 2
    assert "invalid JSON" in capsys.readouterr().err


def test_phi_sweep_rejected_for_self_tuning_scheme(tmp_path, capsys):
    path = base_manifest(tmp_path, scheme="algo2")
    rc = main(["sop", "--manifest", path, "--out", str(tmp_path / "o.csv")])
    assert rc == 2
    assert "sweep.parameter" in capsys.readouterr().err


def test_sop_sweep_deterministic_bytes(tmp_path):
    path = base_manifest(tmp_path)
    out1 = tmp_path / "run1.csv"
    out2 = tmp_path / "run2.csv"
    assert main(["sop", "--manifest", path, "--out", str(out1)]) == 0
    assert main(["sop", "--manifest", path, "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    header, rows = read_csv(out1)
    assert header == ["phi", "phi_used", "sop", "warning"]
    sops = [float(r[2]) for r in rows]
    # more jamming, less outage over this near sector
    assert sops[0] > sops[1] > sops[2]


def test_out_precedence(tmp_path):
    inner = tmp_path / "from_manifest.csv"
    path = base_manifest(tmp_path, output_path=str(inner))
    assert main(["sop", "--manifest", path]) == 0
    assert inner.exists()
    explicit = tmp_path / "explicit.csv"
    assert main(["sop", "--manifest", path, "--out", str(explicit)]) == 0
    assert explicit.read_bytes() == inner.read_bytes()


def test_sor_map_refinement_keeps_coarse_nodes(tmp_path):
    path = base_manifest(tmp_path, scheme={"kind": "uniform", "phi": 0.3})
    coarse = tmp_path / "coarse.csv"
    fine = tmp_path / "fine.csv"
    assert main(["sor-map", "--manifest", path, "--out", str(coarse),
                 "--grid", "721"]) == 0
    assert main(["sor-map", "--manifest", path, "--out", str(fine),
                 "--grid", "1441"]) == 0
    _, rows_c = read_csv(coarse)
    _, rows_f = read_csv(fine)
    assert len(rows_c) == 721 and len(rows_f) == 1441
    fine_map = {r[0]: r[1] for r in rows_f}
    for theta_deg, radius, _ in rows_c:
        assert fine_map[theta_deg] == radius


def test_infeasible_row_becomes_nan_with_note(tmp_path, capsys):
    path = base_manifest(
        tmp_path,
        sweep={"parameter": "bob_dist_m", "grid": [100.0, 5000.0]},
        scheme={"kind": "uniform", "objective": "sop"})
    out = tmp_path / "opt.csv"
    rc = main(["optimize", "--manifest", path, "--out", str(out)])
    assert rc == 0
    header, rows = read_csv(out)
    assert header == ["bob_dist_m", "phi_opt", "objective", "warning"]
    good, bad = rows
    assert 0.0 < float(good[1]) < 1.0 and 0.0 <= float(good[2]) <= 1.0
    assert good[3] == ""
    assert bad[1] == "nan" and bad[2] == "nan"
    assert "infeasible" in bad[3]
    err = capsys.readouterr().err
    assert re.search(r"optimize: wrote .* \(2 rows, 1 warnings\) "
                     r"in \d+\.\d\ds", err)


def test_mc_validate_thread_invariance(tmp_path):
    path = write_manifest(
        tmp_path / "mc.json",
        scenario={"n_antennas": 32, "r_th": 4.0, "bob_dist_m": 80.0},
        region={"angles_deg": [-20.0, 20.0], "d_min_m": 40.0,
                "d_max_m": 120.0},
        sweep={"parameter": "phi", "grid": [0.3]},
        scheme="uniform",
        mc={"n_samples": 300, "master_seed": 11})
    out1 = tmp_path / "t1.csv"
    out4 = tmp_path / "t4.csv"
    assert main(["mc-validate", "--manifest", path, "--out", str(out1),
                 "--threads", "1"]) == 0
    assert main(["mc-validate", "--manifest", path, "--out", str(out4),
                 "--threads", "4"]) == 0
    assert out1.read_bytes() == out4.read_bytes()
    header, rows = read_csv(out1)
    assert header == ["phi", "phi_used", "sop_closed", "sop_mc", "binom_se",
                      "warning"]
    closed, mc, se = (float(v) for v in rows[0][2:5])
    assert abs(mc - closed) < 4.0 * max(se, 1e-3)


def test_threads_env_fallback_rejects_garbage(tmp_path, capsys,
                                              monkeypatch):
    path = write_manifest(
        tmp_path / "mc.json",
        scenario={"n_antennas": 32, "r_th": 4.0, "bob_dist_m": 80.0},
        region={"angles_deg": [-20.0, 20.0], "d_min_m": 40.0,
                "d_max_m": 120.0},
        sweep={"parameter": "phi", "grid": [0.3]},
        scheme="uniform",
        mc={"n_samples": 100})
    monkeypatch.setenv("SECRECY_SOR_THREADS", "many")
    rc = main(["mc-validate", "--manifest", path,
               "--out", str(tmp_path / "o.csv")])
    assert rc == 2
    assert "SECRECY_SOR_THREADS" in capsys.readouterr().err
