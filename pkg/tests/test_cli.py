import json

import numpy as np
import pytest

from lindblad_scars.cli import ConfigError, load_config, main, read_csv


def _hashes(out):
    m = json.loads((out / "manifest.json").read_text())
    return {f["path"]: f["sha256"] for f in m["files"]}


def test_reproduce_fig1_right_small(tmp_path):
    out = tmp_path / "x4"
    assert main(["reproduce", "fig1-right", "--N", "4", "--out", str(out)]) == 0
    t = read_csv(out / "realizations/r00000/spectrum.csv")
    assert len(t["re_lambda"]) == 256
    scar_re = np.sort(t["re_lambda"][t["is_scar"]])
    for p in range(5):
        assert np.any(np.abs(scar_re + 0.2 * p) < 1e-10)
    lines = (out / "realizations/r00000/spectrum.csv").read_text().splitlines()
    assert lines[0] == "index,re_lambda,im_lambda,is_scar,scar_label"
    assert any("spin-zstring[2]" in line for line in lines)


def test_size_and_entanglement_schema(tmp_path, capsys):
    out = tmp_path / "m6"
    assert main(["size", "--split", "even-odd", "--N", "6", "--out", str(out)]) == 0
    header = (out / "realizations/r00000/size.csv").read_text().splitlines()[0]
    assert header == "re_lambda,im_lambda,size_mean,size_var,split_mean,split_second,is_scar"
    assert main(["entanglement", "--partition", "intrasite", "--N", "6", "--out", str(out)]) == 0
    text = (out / "realizations/r00000/entanglement-intrasite.csv").read_text().splitlines()
    assert text[0].startswith("# page_value=")
    assert text[1] == "re_lambda,im_lambda,entropy,is_scar"
    assert not (out / "realizations/r00000/entanglement-intersite.csv").exists()
    assert main(["size", "--split", "x+z", "--N", "6", "--out", str(out)]) == 2


def test_byte_identical_reruns(tmp_path):
    args = ["scars", "--model", "complex-syk", "--N", "6", "--realizations", "2", "--seed", "5"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--workers", "2"]) == 0
    ha, hb = _hashes(tmp_path / "a"), _hashes(tmp_path / "b")
    assert ha == hb and len(ha) >= 5
    for name in ("manifest.json", "realizations/r00001/meta.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cache_reuse_and_no_compute(tmp_path):
    out = tmp_path / "c"
    assert main(["spectrum", "--N", "4", "--out", str(out)]) == 0
    f = out / "realizations/r00000/spectrum.csv"
    stamp = f.stat().st_mtime_ns
    assert main(["spectrum", "--N", "4", "--out", str(out), "--no-compute"]) == 0
    assert f.stat().st_mtime_ns == stamp
    # a different physics config does not reuse the cache
    assert main(["spectrum", "--N", "4", "--mu", "0.2", "--out", str(out), "--no-compute"]) == 3
    assert main(["size", "--N", "4", "--out", str(out), "--no-compute"]) == 3


def test_config_errors(tmp_path, capsys):
    assert main(["spectrum", "--model", "xxz", "--N", "7", "--out", str(tmp_path)]) == 2
    assert "field 'N'" in capsys.readouterr().err
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": "xxz", "N": 4, "colour": 1}))
    assert main(["spectrum", "--config", str(cfg)]) == 2
    assert "field 'colour'" in capsys.readouterr().err
    assert main(["stats", "--N", "4", "--out", str(tmp_path)]) == 2
    assert main(["spectrum", "--N", "4", "--mu", "-1", "--out", str(tmp_path)]) == 2
    with pytest.raises(ConfigError):
        load_config(None, {"model": "majorana-syk", "N": 6, "q": 3})


def test_config_file_with_overrides(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": "xxz", "N": 3, "mu": 0.3, "tolerances": {"vanish": 1e-6}}))
    c = load_config(cfg, {"mu": 0.1, "tolerances": {"eig": 1e-9}})
    assert (c.model, c.N, c.mu) == ("xxz", 3, 0.1)
    assert c.tol("vanish") == 1e-6 and c.tol("eig") == 1e-9
    assert c.physics_hash() != load_config(cfg, {}).physics_hash()
    assert c.physics_hash() == load_config(cfg, {"mu": 0.1, "tolerances": {"eig": 1e-9}, "workers": 3}).physics_hash()


def test_solver_failure_is_recorded(tmp_path):
    out = tmp_path / "f"
    assert main(["spectrum", "--N", "4", "--realizations", "2", "--tol.eig", "1e-30", "--out", str(out)]) == 1
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary["errors"]) == {"0", "1"}
    assert "EigenSolverError" in summary["errors"]["0"]


def test_stats_small_ensemble(tmp_path):
    out = tmp_path / "s"
    rc = main(["stats", "--model", "xxz", "--N", "3", "--realizations", "20", "--min-count", "10", "--out", str(out)])
    assert rc == 0
    fit = json.loads((out / "stats/fit.json").read_text())
    assert fit["center"] == pytest.approx(-0.3)
    assert 0 <= fit["fraction_vanishing"] <= 1
    assert "imaginary_fraction" in fit
    assert (out / "stats/fit.json").exists()
