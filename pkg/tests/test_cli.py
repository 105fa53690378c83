import json

import pytest

from aclab.cli import main


@pytest.fixture
def files(tmp_path):
    (tmp_path / "lin.csv").write_text("1,1,1,1\n")
    (tmp_path / "ones.csv").write_text("1,1,1,1\n1,1,1,1\n1,1,1,1\n1,1,1,1\n")
    (tmp_path / "r1.csv").write_text("1,2,0\n2,4,0\n3,6,1\n")
    (tmp_path / "bad.csv").write_text("1,2\n3,x\n")
    (tmp_path / "exact.csv").write_text("1,2,3\n2,4,6\n3,6,9\n")
    (tmp_path / "sym.csv").write_text("0,1,1,1\n1,0,1,1\n1,1,0,1\n1,1,1,0\n")
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_dist_linear(files, capsys):
    code, out, _ = run(capsys, "dist", files / "lin.csv")
    obj = json.loads(out)
    assert code == 0
    assert obj["report"]["sup_prob"] == "3/8"
    assert obj["bound"]["bound_name"] == "lo" and obj["bound"]["passes"]
    assert "threads" not in obj["config"]["budget"]
    assert len(obj["input_sha256"]) == 64


def test_dist_bilinear_csv(files, capsys):
    code, out, _ = run(capsys, "dist", files / "ones.csv", "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "value,prob" and "0,39/64" in out


def test_dist_full_law_file(files, capsys):
    target = files / "law.csv"
    code, _, _ = run(capsys, "dist", files / "lin.csv", "--dist-csv", target)
    assert code == 0 and target.read_text().splitlines()[1:] == ["-4,1/16", "-2,1/4", "0,3/8", "2,1/4", "4,1/16"]


def test_output_independent_of_threads(files, capsys):
    _, a, _ = run(capsys, "dist", files / "ones.csv", "--threads", "1", "--seed", "3")
    _, b, _ = run(capsys, "dist", files / "ones.csv", "--threads", "4", "--seed", "3")
    assert a == b


def test_env_threads(files, capsys, monkeypatch):
    monkeypatch.setenv("ACLAB_THREADS", "3")
    code, _, _ = run(capsys, "dist", files / "ones.csv")
    assert code == 0


@pytest.mark.parametrize("argv", [("dist", "bad.csv"), ("dist", "missing.csv"),
                                  ("dist", "lin.csv", "--budget", "foo=3"), ("verify", "nope")])
def test_input_errors_exit_2(files, capsys, argv):
    code, _, err = run(capsys, argv[0], files / argv[1], *argv[2:]) if argv[0] != "verify" else run(capsys, *argv)
    assert code == 2 and err


def test_parse_error_reports_position(files, capsys):
    _, _, err = run(capsys, "dist", files / "bad.csv")
    assert "line 2" in err


def test_budget_exit_3(files, capsys):
    code, _, err = run(capsys, "dist", files / "ones.csv", "--budget", "enum_cap=4")
    assert code == 3 and "--budget" in err


def test_verify_suite(capsys):
    code, out, err = run(capsys, "verify", "halasz", "--format", "csv")
    assert code == 0 and out.startswith("suite,case,pass") and "PASS" in err


@pytest.mark.parametrize("detector", ["rank1", "ap", "tuple", "degenerate-pair", "comm", "gap"])
def test_detect_and_verify_cert(files, capsys, detector):
    cert = files / f"{detector}.json"
    code, _, _ = run(capsys, "detect", files / "r1.csv", "--detector", detector, "--bound", "6",
                     "--max-exceptions", "3", "--out", cert)
    assert code == 0
    code, out, _ = run(capsys, "verify-cert", cert)
    assert code == 0 and json.loads(out)["valid"]


def test_kcore_detector(files, capsys):
    out_file = files / "k.json"
    assert run(capsys, "detect", files / "sym.csv", "--detector", "kcore", "--threshold", "3",
               "--out", out_file)[0] == 0
    obj = json.loads(out_file.read_text())
    assert obj["certificate"]["indices"] == [1, 2, 3, 4]
    assert run(capsys, "verify-cert", out_file)[0] == 0


def test_tampered_certificate_fails(files, capsys):
    cert = files / "c.json"
    run(capsys, "detect", files / "exact.csv", "--detector", "rank1", "--out", cert)
    obj = json.loads(cert.read_text())
    assert obj["certificate"]["rows"] == [1, 2, 3] and obj["certificate"]["cols"] == [1, 2, 3]
    obj["input"]["rows"][0][0] = {"re": "7"}
    cert.write_text(json.dumps(obj))
    code, out, _ = run(capsys, "verify-cert", cert)
    assert code == 1 and not json.loads(out)["valid"]


def test_shatter(files, capsys):
    code, out, _ = run(capsys, "shatter", "--n", "8", "--seed", "2")
    obj = json.loads(out)
    assert code == 0 and obj["shatters"] and len(obj["family"]["partitions"]) == 172
    code, out, _ = run(capsys, "shatter", files / "sym.csv", "--r", "1")
    assert code == 0
    assert run(capsys, "shatter")[0] == 2


def test_report_csv(files, capsys):
    code, out, _ = run(capsys, "report", files / "lin.csv", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "bound_name,bound_value,prob,ratio,passes" and lines[1].startswith("lo,")


def test_report_bilinear(files, capsys):
    code, out, _ = run(capsys, "report", files / "ones.csv")
    names = [b["bound_name"] for b in json.loads(out)["bounds"]]
    assert code == 0 and names == ["bilo", "row_zero_count"]
