import json
import subprocess
import sys

import pytest

from lambekbang import cli, kernel
from conftest import data_path


@pytest.fixture
def golden_file(tmp_path, goldens):
    def write(name):
        d, calc = goldens[name]
        p = tmp_path / f"{name}.json"
        kernel.dump(d, p, calculus=calc)
        return str(p)
    return write


def run_json(capsys, *argv):
    code = cli.main(["--format", "json", *argv])
    rec = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert rec["exit"] == code
    return code, rec


def test_check(capsys, golden_file):
    p = golden_file("fig2")
    code, rec = run_json(capsys, "check", "--calculus", "b2018st", "--derivation", p)
    assert code == 0 and rec["ok"] and rec["cuts"] == 0
    assert cli.main(["check", "--calculus", "b2015st", "--derivation", p]) == 1
    assert "error" in capsys.readouterr().out


def test_search_exit_codes(capsys, tmp_path):
    out = tmp_path / "w.json"
    code, rec = run_json(capsys, "search", "--calculus", "b2018st-prime", "--sequent", "!p, q => q * !p",
                         "--emit-derivation", str(out))
    assert code == 0 and rec["verdict"] == "Derivable" and out.exists()
    assert cli.main(["search", "--calculus", "b2018st", "--sequent", "!p, q => q * !p"]) == 1
    code, rec = run_json(capsys, "search", "--calculus", "malc*", "--sequent", "p/q, q/r, r/s, s => p",
                         "--max-depth", "2")
    assert code == 2 and "max_depth" in rec["caps"]
    code, rec = run_json(capsys, "search", "--calculus", "malc*", "--sequent", "p => ")
    assert code == 3 and "error" in rec
    assert cli.main(["search", "--calculus", "nope", "--sequent", "p => p"]) == 3


def test_search_reads_sequent_file(capsys, tmp_path):
    f = tmp_path / "goal.txt"
    f.write_text("q => <>q\n")
    assert cli.main(["search", "--calculus", "b2015st", "--sequent", f"@{f}"]) == 1
    capsys.readouterr()


def test_cutelim(capsys, golden_file, tmp_path):
    out = tmp_path / "free.json"
    code, rec = run_json(capsys, "cutelim", "--calculus", "b2018st-prime", "--derivation",
                         golden_file("cut2018-primed"), "--out", str(out), "--trace")
    assert code == 0 and rec["cuts_before"] == 2 and rec["cuts_after"] == 0 and rec["measure_decreasing"]
    assert kernel.cut_count(kernel.load(out)) == 0
    code, rec = run_json(capsys, "cutelim", "--calculus", "b2018st", "--derivation", golden_file("cut2018"))
    assert code == 3


def test_project(capsys, golden_file, tmp_path):
    code, rec = run_json(capsys, "project", "--sequent", "<>p => p")
    assert code == 0 and rec["sequent"] == "p => p"
    code, rec = run_json(capsys, "project", "--mode", "pi_q", "--sequent", "q, p => q*p")
    assert rec["sequent"] == "1, p => 1*p"
    flat = tmp_path / "flat.json"
    assert cli.main(["destoup", "--calculus", "b2018st", "--target", "b2018", "--derivation",
                     golden_file("fig2"), "--out", str(flat)]) == 0
    code, rec = run_json(capsys, "project", "--derivation", str(flat))
    assert code == 0 and rec["ok"]
    assert cli.main(["project", "--sequent", "p => p", "--derivation", str(flat)]) == 3
    capsys.readouterr()


def test_enstoup(capsys, tmp_path):
    src = tmp_path / "src.json"
    assert cli.main(["search", "--calculus", "b2018", "--sequent", "q, !p => p * q",
                     "--emit-derivation", str(src)]) == 0
    code, rec = run_json(capsys, "enstoup", "--calculus", "b2018", "--target", "b2018st-prime+cut",
                         "--derivation", str(src))
    assert code == 0 and rec["ok"] and "derivation" in rec


def test_encode(capsys, tmp_path):
    g = data_path("grammars/anbn.txt")
    out = tmp_path / "enc.json"
    code, rec = run_json(capsys, "encode", "--grammar", g, "--scheme", "b2015", "--word", "a a b b",
                         "--emit-sequent", "--emit-derivation", str(out), "--selftest")
    assert code == 0 and rec["selftest"] and rec["ok"] and rec["trace"] == ["s", "a s b", "a a b b"]
    assert out.exists()
    code, rec = run_json(capsys, "encode", "--grammar", g, "--scheme", "buszkowski", "--word", "a b",
                         "--check", "--selftest")
    assert code == 0 and rec["ok"]
    code, rec = run_json(capsys, "encode", "--grammar", g, "--scheme", "malc", "--word", "b a")
    assert code == 1 and rec["member"] is False
    bad = tmp_path / "bad.txt"
    bad.write_text("-> a\n")
    assert cli.main(["encode", "--grammar", str(bad), "--scheme", "malc", "--word", "a"]) == 3
    capsys.readouterr()


def test_parse(capsys):
    code, rec = run_json(capsys, "parse", "--calculus", "!r-malc*+additives=off", "--lexicon", "plain",
                         "--phrase", "the paper that John signed without reading")
    assert code == 0 and rec["verdict"] == "Derivable"
    code, rec = run_json(capsys, "parse", "--calculus", "b2018st-prime-lr", "--lexicon", "bracketed",
                         "--mode", "t", "--max-brackets", "2", "--goal", "CN", "--phrase", "man who likes")
    assert code == 1 and rec["by_bound"] == {"0": "Underivable", "1": "Underivable", "2": "Underivable"}
    code, rec = run_json(capsys, "parse", "--calculus", "malc*", "--lexicon", "plain", "--phrase", "zzz")
    assert code == 3


def test_text_output(capsys):
    assert cli.main(["search", "--calculus", "malc*", "--sequent", "p => p"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("Derivable") and "id" in text


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "lambekbang", "search", "--calculus", "malc*", "--sequent", "p => p"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "Derivable" in r.stdout
