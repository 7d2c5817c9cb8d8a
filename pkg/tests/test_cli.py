import json
import os
import shutil
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from cpgrowth.cli import main
from cpgrowth.cover import EXTREMAL_3X3, CoverSet
from cpgrowth.datasets import _bundled_dir
from cpgrowth.formats import format_matrix
from cpgrowth.infeas import UpperBoundCertificate, theorem_pipeline
from cpgrowth.lowerbound import printed_matrix

from test_infeas import extremal_boxes


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def mfile(tmp_path):
    def write(A, name="m.txt"):
        p = tmp_path / name
        p.write_text(format_matrix(A) + "\n")
        return p
    return write


def test_growth_exit_codes(mfile, capsys):
    assert run("growth", mfile(EXTREMAL_3X3[0])) == 0
    assert "growth: 9/4" in capsys.readouterr().out
    assert run("growth", mfile([[1, 2], [3, 4]])) == 2
    bad = mfile([[1, 2], [3, 4]])
    bad.write_text("2\n1 x\n3 4\n")
    assert run("growth", bad) == 64
    assert run("growth", bad.parent / "missing.txt") == 66
    assert run("frobnicate") == 64
    assert run("cover", "--g", "not-a-number", "--level", "2", "-o", "x") == 64


def test_normalize_writes_manifest(mfile, tmp_path):
    out = tmp_path / "n.txt"
    src = mfile([[0, 1], [2, 0]])
    assert run("normalize", src, "-o", out) == 0
    man = json.loads(Path(str(out) + ".manifest.json").read_text())
    assert man["subcommand"] == "normalize" and str(out) in man["outputs"]
    assert str(src) in man["inputs"] and man["version"]
    assert out.read_text().startswith("2\n1 ")


def test_cover_config_rerun(tmp_path, capsys):
    out = tmp_path / "s.cover"
    assert run("cover", "--g", "11/5", "--level", "2", "-o", out) == 0
    S = CoverSet.load(out)
    assert len(S) > 0 and S.level == 2
    again = tmp_path / "again.cover"
    conf = json.loads(Path(str(out) + ".manifest.json").read_text())
    conf["parameters"]["out"] = str(again)
    (tmp_path / "conf.json").write_text(json.dumps(conf))
    assert run("--config", tmp_path / "conf.json", "cover") == 0
    assert again.read_bytes() == out.read_bytes()
    assert run("project", out) == 0
    assert capsys.readouterr().out.splitlines()[-1].count(",") == 3
    assert run("cover", "--g", "11/5", "--level", "3", "--budget", "10", "-o", tmp_path / "b") == 5


def test_pattern_and_search(mfile, tmp_path, capsys):
    assert run("pattern", mfile(printed_matrix()), "--json", tmp_path / "p.json") == 0
    assert "fixed: 14" in capsys.readouterr().out
    assert json.loads((tmp_path / "p.json").read_text())["n"] == 5
    assert run("search", "--n", 3, "--restarts", 3, "-o", tmp_path / "best.txt") == 0
    assert (tmp_path / "best.txt.manifest.json").exists()


def test_poly_commands(tmp_path, capsys):
    assert run("poly", "refine", "@p7", "--lo", 3, "--hi", 16, "--digits", 36) == 0
    assert "6.056953473721059619788033246920631605" in capsys.readouterr().out
    assert run("poly", "descartes", "@p5", "--mobius", 5, 4, 1, 1) == 0
    assert capsys.readouterr().out.strip() == "1"
    assert run("poly", "isolate", "@p5", "--lo", -5, "--hi", 0) == 0
    assert capsys.readouterr().out.startswith("0 real root")
    f, q = tmp_path / "f.poly", tmp_path / "q.poly"
    f.write_text("x 2\n-4\n0\n1\n")
    q.write_text("x 1\n-2\n1\n")
    assert run("poly", "divide", f, q) == 0
    f.write_text("x 2\n1\n0\n1\n")
    assert run("poly", "divide", f, q) == 1


def test_groebner_command(capsys):
    assert run("groebner", "x^2 - y", "y - 1", "--vars", "x,y") == 0
    assert sorted(capsys.readouterr().out.split("\n")[:2]) == sorted(["y - 1", "x^2 - 1"])
    assert run("groebner", "x^3 - y*z", "y^2 - x*z", "z^2 - x*y + 1", "--vars", "x,y,z", "--max-pairs", 1) == 5


def test_bundled_verifications():
    assert run("verify-p7") == 0
    assert run("case-4e") == 0
    assert run("verify-p5", "--no-discriminant", "--no-point") == 0


def test_corrupted_data_dir(tmp_path):
    data = tmp_path / "data"
    shutil.copytree(_bundled_dir(), data)
    p5 = data / "p5.poly"
    p5.write_text(p5.read_text().replace("1", "2", 1))
    env = dict(os.environ, CPGROWTH_DATA=str(data))
    cmd = [sys.executable, "-m", "cpgrowth.cli", "verify-p5", "--no-discriminant", "--no-point"]
    assert subprocess.run(cmd, env=env, capture_output=True).returncode == 65


def test_certificate_commands(tmp_path):
    boxes = extremal_boxes(4)[:1]
    covers = {g: CoverSet(g, 4, boxes) for g in (Fraction(11, 5), Fraction(43, 20))}
    cert = theorem_pipeline(Fraction(11, 5), Fraction(43, 20), 4, covers=covers)
    cert.save(tmp_path / "c.json")
    assert run("verify-certificate", tmp_path / "c.json", "--exact-samples", 1) == 0
    doc = json.loads((tmp_path / "c.json").read_text())
    doc["bound"] = "5"
    (tmp_path / "bad.json").write_text(json.dumps(doc))
    assert run("verify-certificate", tmp_path / "bad.json") == 1
    out = tmp_path / "partial.json"
    assert run("certify-upper", "--g1", "56/25", "--g2", "11/5", "--level", 1, "--budget", 1, "-o", out) == 4
    assert UpperBoundCertificate.load(out).status == "partial"
    assert run("verify-certificate", out) == 4
