import json
import math
import random
import subprocess
import sys
from fractions import Fraction

from hyperpos.cli import main
from hyperpos.hyperdet import HyperArray

from oracles import rand_nested


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, (json.loads(out) if code == 0 and out.strip().startswith("{") else out), err


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def test_det_identity_and_constant(capsys, tmp_path):
    p = write(tmp_path, "id.json", {"order": 2, "side": 2, "values": [1, 0, 0, 1]})
    code, rep, _ = run(capsys, "det", "--input", p)
    assert code == 0 and rep["det"] == "1"
    assert rep["config"]["input"] == str(p) and rep["config"]["backend"] == "auto"
    p = write(tmp_path, "ones.json", {"order": 4, "side": 2, "values": [1] * 16})
    code, rep, _ = run(capsys, "det", "--input", p)
    assert rep["det"] == "0"


def test_det_with_oracle(capsys, tmp_path):
    A = HyperArray(rand_nested(random.Random(0), 4, 2))
    p = write(tmp_path, "r.json", A.to_json())
    code, rep, _ = run(capsys, "det", "--input", p, "--oracle")
    assert code == 0 and rep["equal"] is True
    assert rep["oracle"]["det"] == rep["det"]
    assert Fraction(rep["det"]) == Fraction(rep["oracle"]["det"])


def test_round_trip_is_bit_identical(capsys, tmp_path):
    A = HyperArray(rand_nested(random.Random(1), 4, 3))
    src = write(tmp_path, "a.json", A.to_json())
    dump = tmp_path / "dump.json"
    code, _, _ = run(capsys, "det", "--input", src, "--dump-array", dump)
    assert code == 0
    B = HyperArray.from_json(json.loads(dump.read_text()))
    assert A == B and B.to_json() == A.to_json()


def test_exit_codes(capsys, tmp_path):
    code, _, err = run(capsys, "det", "--input", tmp_path / "missing.json")
    assert code == 2 and json.loads(err)["exit_code"] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "det", "--input", bad)[0] == 2
    odd = write(tmp_path, "odd.json", {"order": 3, "side": 2, "values": [1] * 8})
    assert run(capsys, "det", "--input", odd)[0] == 2
    big = write(tmp_path, "big.json", {"order": 4, "side": 3, "values": [1] * 81})
    code, _, err = run(capsys, "det", "--input", big, "--budget", 10)
    assert code == 3 and json.loads(err)["error"] == "CapExceeded"
    code, _, err = run(capsys, "kernel-det", "--kernel", "negbinomial", "--a", "1", "--grid", "[[2,1],[2,1]]")
    assert code == 4 and "index" in json.loads(err)["message"]
    assert run(capsys, "nonsense")[0] == 2


def test_kernel_det(capsys):
    code, rep, _ = run(capsys, "kernel-det", "--kernel", "exp", "--grid", "[[1,0],[1,0]]")
    assert code == 0 and math.isclose(rep["det"], math.e - 1)
    code, rep, _ = run(capsys, "kernel-det", "--kernel", "negbinomial", "--a", "2", "--backend", "rational",
                       "--grid", '[["1/2","1/3"],["1/2",0]]')
    assert code == 0 and isinstance(rep["det"], str)


def test_htp_scan_example(capsys):
    code, rep, _ = run(capsys, "htp-scan", "--kernel", "exp", "--m", 2, "--n", 2, "--samples", 1000, "--seed", 7)
    assert code == 0 and rep["violations"] == 0
    assert rep["config"]["seed"] == 7 and rep["samples"] == 1000


def test_htp_scan_threads_identical(capsys):
    args = ["htp-scan", "--kernel", "pfq", "--a", "1", "--b", "2", "--m", 2, "--n", 2, "--samples", 50, "--seed", 1]
    _, r1, _ = run(capsys, *args)
    _, r4, _ = run(capsys, *args, "--threads", 4)
    r1.pop("config"), r4.pop("config")
    assert r1 == r4


def test_identity_exp_schur_example(capsys):
    code, rep, _ = run(capsys, "identity", "exp-schur", "--m", 1, "--grid", "[[1,0],[1,0]]", "--max-weight", 20)
    assert code == 0 and math.isclose(rep["value"], math.e - 1, rel_tol=1e-15)
    assert rep["relative_error"] < 1e-14


def test_identity_pfq_and_rational(capsys):
    code, rep, _ = run(capsys, "identity", "pfq-schur", "--a", "1", "--grid", "[[0.5,0.1],[0.6,0.2]]",
                       "--max-weight", 60)
    assert code == 0 and rep["relative_error"] < 1e-12
    code, rep, _ = run(capsys, "identity", "exp-schur", "--backend", "rational", "--grid", '[[1,0],["1/2",0]]',
                       "--max-weight", 5, "--no-engine")
    assert code == 0 and "/" in rep["value"]


def test_identity_binet_cauchy(capsys, tmp_path):
    rng = random.Random(3)
    phi = [[[rng.randint(-2, 2) for _ in range(4)] for _ in range(2)] for _ in range(4)]
    p = write(tmp_path, "bc.json", {"phi": phi, "weights": [1, 2, "1/3", 1]})
    code, rep, _ = run(capsys, "identity", "binet-cauchy", "--input", p)
    assert code == 0 and rep["equal"] is True and rep["lhs"] == rep["rhs"]


def test_hciz_example(capsys):
    code, rep, _ = run(capsys, "hciz", "--n", 1, "--x", 1, "--y", 1, "--samples", 1000)
    assert code == 0 and math.isclose(rep["mean"], math.e)


def test_hc_extended_from_spectra_json(capsys, tmp_path):
    spec = {"spectra": [[0.5, 0.1], [0.4, 0.0], [0.3, 0.2], [0.45, 0.05]], "samples": 20000, "seed": 2, "max_weight": 12}
    p = write(tmp_path, "s.json", spec)
    code, rep, _ = run(capsys, "hc-extended", "--input", p)
    assert code == 0 and rep["mc"]["samples"] == 20000 and abs(rep["z_score"]) < 4
    code, rep, _ = run(capsys, "hc-extended", "--input", p, "--a", "1")
    assert code == 0 and rep["mc"]["rejected"] >= 0


def test_text_format_and_output_file(capsys, tmp_path):
    out = tmp_path / "r.txt"
    code, _, _ = run(capsys, "kernel-det", "--grid", "[[1,0],[1,0]]", "--format", "text", "--output", out)
    assert code == 0 and "det:" in out.read_text()


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "hyperpos.cli", "kernel-det", "--grid", "[[1,0],[1,0]]"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["command"] == "kernel-det"
