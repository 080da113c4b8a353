import json
import os
import subprocess
import sys


REPO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def run_cli(*args, ledger=None):
    env = dict(os.environ, PYTHONIOENCODING="utf-8")
    if ledger is not None:
        env["FAT_HANDLES_LEDGER"] = str(ledger)
    cmd = [sys.executable, "run_toolkit.py", *args]
    return subprocess.run(cmd, cwd=REPO, env=env, stdout=subprocess.PIPE, stderr=subprocess.PIPE, encoding="utf-8")


def test_build_prints_the_link():
    res = run_cli("build", "III(III(h,h),h)", "--quiet")
    assert res.returncode == 0, f"build failed: {res.stderr}"
    assert "link: d·d·u·u" in res.stdout
    assert "explicit: III(h,III(h,h;hopf.0,hopf.2);hopf.0,sep.d2)" in res.stdout


def test_build_json():
    res = run_cli("build", "III(h,h)", "--format", "json", "--quiet")
    assert res.returncode == 0, res.stderr
    doc = json.loads(res.stdout)
    assert doc["expression"] == "III(h,h;hopf.0,hopf.2)"
    assert doc["profile"]["plain_link"] == "d·d·u"


def test_build_batch_json():
    res = run_cli("build", "--batch", os.path.join("data", "example_flows.txt"), "--format", "json", "--quiet")
    assert res.returncode == 0, res.stderr
    docs = json.loads(res.stdout)
    assert len(docs) == 10
    assert docs[0]["expression"] == "I(h,h)"
    assert docs[6]["expression"] == "III(h,III(h,h;hopf.0,hopf.2);hopf.0,sep.d2)"


def test_order_prints_a_chain():
    res = run_cli("order", "II(II(III(h,h),h),h)", "--quiet")
    assert res.returncode == 0, res.stderr
    lines = res.stdout.splitlines()
    assert lines[0] == "σ1<σ2<σ3; total: true over saddles"
    assert lines[1] == "saddles: σ1=u3, σ2=u1, σ3=u2"


def test_bitorus_is_an_error():
    res = run_cli("build", "II(h,I(h,h);hopf.0)", "--quiet")
    assert res.returncode == 1
    assert "BitorusError" in res.stderr
    assert res.stdout == ""


def test_bad_usage_exits_with_two():
    res = run_cli("frobnicate")
    assert res.returncode == 2


def test_verify_suite_passes(tmp_path):
    res = run_cli("verify", "class-closure", "--n", "2", "--quiet", ledger=tmp_path / "golden.json")
    assert res.returncode == 0, res.stdout + res.stderr
    assert "passed: ok" in res.stdout


def test_enumerate_writes_outputs(tmp_path):
    ledger = tmp_path / "golden.json"
    res = run_cli("enumerate", "--n", "2", "--out", str(tmp_path / "runs"), "--quiet", ledger=ledger)
    assert res.returncode == 0, f"enumerate failed: {res.stderr}"
    out_dir = res.stdout.strip().splitlines()[-1].strip()
    for name in ("census.jsonl", "census.json", "report.md"):
        assert os.path.exists(os.path.join(out_dir, name)), name
    with open(os.path.join(out_dir, "census.json"), encoding="utf-8") as f:
        summary = json.load(f)
    assert summary["flows"] == summary["oracle"]
    assert ledger.exists()


def test_render_writes_svg(tmp_path):
    res = run_cli("render", "III(III(h,h),h)", "schematic", "--out", str(tmp_path / "flow"), "--quiet")
    assert res.returncode == 0, res.stderr
    assert os.path.exists(tmp_path / "flow.svg")


def test_render_is_byte_identical_across_runs(tmp_path):
    outputs = []
    for name in ("first", "second"):
        res = run_cli("render", "II(II(III(h,h),h),h)", "schematic", "--out", str(tmp_path / name), "--quiet")
        assert res.returncode == 0, res.stderr
        outputs.append((tmp_path / f"{name}.svg").read_bytes())
    assert outputs[0] == outputs[1]


def test_enumerate_run_directory_is_named_after_the_census(tmp_path):
    res = run_cli("enumerate", "--n", "2", "--out", str(tmp_path / "runs"), "--quiet", ledger=tmp_path / "golden.json")
    assert res.returncode == 0, res.stderr
    out_dir = res.stdout.strip().splitlines()[-1].strip()
    assert os.path.basename(out_dir) == "census_n2_plain"
