import json
import subprocess
import sys

import pytest

from orlicz_lorentz.harness.cli import bundled_config, main

CHI = '{"breakpoints": [0, 1], "values": [1]}'


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_rearrange(capsys):
    code, out, _ = run(capsys, "rearrange", '{"breakpoints":[0,1,2,2.5],"values":[3,1,5]}', "--t", "0.5,2")
    data = json.loads(out)
    assert code == 0
    assert data["star"] == {"breakpoints": [0.0, 0.5, 1.5, 2.5], "values": [5.0, 3.0, 1.0]}
    assert data["double_star"]["2"] == pytest.approx((5 * 0.5 + 3 * 1 + 1 * 0.5) / 2)


def test_rearrange_from_file(capsys, tmp_path):
    (tmp_path / "f.json").write_text(CHI)
    out_file = tmp_path / "r.json"
    code, _, _ = run(capsys, "rearrange", str(tmp_path / "f.json"), "--out", str(out_file))
    assert code == 0 and json.loads(out_file.read_text())["total_measure"] == 1.0


def test_norm(capsys):
    code, out, _ = run(capsys, "norm", '{"breakpoints":[0,4],"values":[1]}', "--phi", '{"kind":"power","p":2}')
    assert code == 0 and json.loads(out)["gauge_norm"] == pytest.approx(2.0, rel=1e-10)
    code, out, _ = run(capsys, "norm", CHI, "--phi", '{"kind":"power","p":2}', "--weight", '{"constant":2}')
    assert json.loads(out)["gauge_norm"] == pytest.approx(2 ** 0.5, rel=1e-10)


def test_apply(capsys):
    code, out, _ = run(capsys, "apply", CHI, "--operator", '{"kind":"hardy_I2"}', "--x", "0.5,2")
    assert code == 0 and json.loads(out)["values"] == [0.125, 1.5]


def test_verify(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "oneil2", "--inputs", f'{{"f": {CHI}, "g": {CHI}}}',
                       "--grid", "1", "--out", str(tmp_path))
    assert code == 0 and "outcome=pass" in out
    assert (tmp_path / "oneil2.csv").read_text().splitlines()[1] == "oneil2,0,t=1,0.75,1,0.25,pass"


def test_check(capsys):
    req = json.dumps({"suite": "growth", "inputs": {"kernel": "sq_diff", "triples": 20},
                      "expect": "violated"})
    code, out, _ = run(capsys, "check", req)
    assert code == 0 and "outcome=violated" in out


def test_check_with_grid(capsys):
    req = json.dumps({"suite": "theorem7", "inputs": {"u": {"constant": 1}}})
    code, out, _ = run(capsys, "check", req, "--grid", "7")
    assert code == 0 and "outcome=pass" in out


def test_run_bad_config_exit_two(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"scenarios": [\n {"suite": }]}')
    code, _, err = run(capsys, "run", str(bad), "--out", str(tmp_path / "out"))
    assert code == 2 and "bad.json:2:12" in err
    assert not (tmp_path / "out").exists()


def test_bad_descriptor_exit_two(capsys):
    code, _, err = run(capsys, "norm", "{not json", "--phi", '{"kind":"power","p":2}')
    assert code == 2 and "error:" in err


def test_bundled_config_exists():
    data = json.loads(bundled_config().read_text())
    names = {s["name"] for s in data["scenarios"]}
    assert {"sandwich", "kantorovich", "hls_v_prime", "vii_prime_divergence"} <= names


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "orlicz_lorentz", "run", "@paper_examples",
                           "--out", str(tmp_path)], capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert all(s["ok"] for s in summary["scenarios"])
