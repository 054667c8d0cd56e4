import io
import json
import os
import subprocess
import sys

import pytest

from cellcount.cli import EXIT_FAILED, EXIT_INPUT, EXIT_OK, EXIT_SOLVER, EXIT_USAGE, SCHEMAS, run
from cellcount.formula import parse_dimacs
from cellcount.exact import brute_force_count, brute_force_weight

FAKE = os.path.join(os.path.dirname(__file__), "fake_solver.py")


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def check_schema(kind, rec):
    for key, typ in SCHEMAS[kind].items():
        assert key in rec, key
        if typ is float:
            assert isinstance(rec[key], (int, float)), key
        else:
            assert isinstance(rec[key], typ), key


@pytest.fixture
def cnf(tmp_path):
    p = tmp_path / "f.cnf"
    p.write_text("p cnf 3 1\n1 2 0\n")
    return p


@pytest.fixture
def wcnf(tmp_path):
    p = tmp_path / "w.cnf"
    p.write_text("p cnf 3 1\nc w 1 3/4\nc w 2 1/2\n1 2 0\n")
    return p


def test_count_text_and_json(cnf):
    code, out, _ = call("count", "--seed", 3, cnf)
    lines = out.splitlines()
    assert code == EXIT_OK and lines[0] == "s mc 6"
    rec = json.loads(lines[1])
    check_schema("count", rec)
    assert rec["exact"] and rec["seed"] == 3
    code, out, _ = call("count", "--seed", 3, "--output", "json", cnf)
    assert json.loads(out)["estimate"] == 6


def test_count_with_mis_first(tmp_path):
    p = tmp_path / "eq.cnf"
    p.write_text("p cnf 3 2\n1 -2 0\n-1 2 0\n")
    code, out, err = call("count", "--seed", 1, "--mis-first", p)
    assert code == EXIT_OK and out.startswith("s mc 4") and "support size 2" in err


def test_wcount_exact(wcnf):
    code, out, _ = call("wcount", "--seed", 1, wcnf)
    assert code == EXIT_OK
    first, rec = out.splitlines()[0], json.loads(out.splitlines()[1])
    inst = parse_dimacs(wcnf.read_text())
    want = brute_force_weight(inst.formula, inst.weights)
    assert first.split()[2] == str(want)
    check_schema("wcount", rec)
    assert rec["tilt"] == "3"


def test_sample_text_lines_and_determinism(cnf):
    code, out, _ = call("sample", "--seed", 4, "-N", 25, cnf)
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "c seed 4" and lines[1].startswith("c unigen2 epsilon 16.0")
    wit = [l for l in lines if not l.startswith("c")]
    assert len(wit) == 25 and all(l.endswith(" 0") for l in wit)
    f = parse_dimacs(cnf.read_text()).formula
    for l in wit:
        lits = [int(t) for t in l.split()[:-1]]
        assert f.satisfied_by(sum(1 << x for x in lits if x > 0))
    assert call("sample", "--seed", 4, "-N", 25, cnf)[1] == out


@pytest.mark.parametrize("variant", ["unigen", "unigen2"])
def test_sample_json(cnf, variant):
    code, out, _ = call("sample", "--seed", 2, "-N", 5, "--variant", variant, "--output", "json", cnf)
    rec = json.loads(out)
    check_schema("sample", rec)
    assert code == EXIT_OK and len(rec["samples"]) == 5 and rec["variant"] == variant


def test_sample_freq(cnf):
    code, out, _ = call("sample", "--seed", 2, "-N", 40, "--freq", cnf)
    pairs = [l for l in out.splitlines() if not l.startswith("c")]
    assert sum(int(l.split()[-1]) for l in pairs) == 40


def test_wsample(wcnf):
    code, out, _ = call("wsample", "--seed", 2, "-N", 6, "--output", "json", wcnf)
    rec = json.loads(out)
    check_schema("sample", rec)
    assert code == EXIT_OK and len(rec["samples"]) == 6


def test_mis_output(tmp_path):
    p = tmp_path / "eq.cnf"
    p.write_text("p cnf 2 2\n1 -2 0\n-1 2 0\n")
    code, out, _ = call("mis", "--seed", 0, p)
    lines = out.splitlines()
    assert code == EXIT_OK and lines[0] in ("c ind 1 0", "c ind 2 0")
    assert lines[1] == "c size 1 minimal true seed 0"
    code, out, _ = call("mis", "--seed", 0, "--output", "json", p)
    check_schema("mis", json.loads(out))


def test_relnet(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("p graph 3 2\ne 1 2\ne 2 3 3 2\n")
    code, out, _ = call("relnet", "--seed", 1, "--source", 1, "--sink", 3, p)
    row = json.loads(out)
    check_schema("relnet", row)
    assert code == EXIT_OK and row["r_exact"] == "5/8"
    code, out, _ = call("relnet", "--seed", 1, "--all-pairs", p)
    assert len(out.splitlines()) == 3
    assert call("relnet", p)[0] == EXIT_USAGE


def test_reduce(wcnf):
    code, out, _ = call("reduce", wcnf)
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "c C_F 2^-3"
    inst = parse_dimacs("\n".join(l for l in lines if not l.startswith("c C_F") and not l.startswith("c mode")))
    orig = parse_dimacs(wcnf.read_text())
    assert brute_force_count(inst.formula) * __import__("fractions").Fraction(1, 8) == \
        brute_force_weight(orig.formula, orig.weights)


def test_exit_codes(tmp_path, cnf):
    assert call()[0] == EXIT_USAGE
    assert call("count", "--bogus", cnf)[0] == EXIT_USAGE
    assert call("count", tmp_path / "missing.cnf")[0] == EXIT_INPUT
    bad = tmp_path / "bad.cnf"
    bad.write_text("p cnf 2 1\n1 3 0\n")
    code, _, err = call("count", bad)
    assert code == EXIT_INPUT and "line 2" in err
    unsat = tmp_path / "u.cnf"
    unsat.write_text("p cnf 1 2\n1 0\n-1 0\n")
    assert call("sample", "--seed", 0, unsat)[0] == EXIT_INPUT
    nd = tmp_path / "nd.cnf"
    nd.write_text("p cnf 1 0\nc w 1 1/3\n")
    assert call("reduce", nd)[0] == EXIT_INPUT
    crash = f"external:{sys.executable} {FAKE} --crash"
    assert call("count", "--seed", 0, "--solver", crash, cnf)[0] == EXIT_SOLVER
    assert call("sample", "--seed", 0, "--epsilon", 3, cnf)[0] == EXIT_USAGE


def test_failure_exit_code(tmp_path, monkeypatch):
    import cellcount.cli as cli
    from cellcount.counting import AllIterationsFailed

    def boom(*a, **k):
        raise AllIterationsFailed("every core failed")

    monkeypatch.setattr(cli, "approxmc2", boom)
    p = tmp_path / "f.cnf"
    p.write_text("p cnf 2 0\n")
    assert call("count", "--seed", 0, p)[0] == EXIT_FAILED


def test_missing_seed_is_echoed(cnf):
    code, out, _ = call("count", "--output", "json", cnf)
    assert isinstance(json.loads(out)["seed"], int)


def test_verbose_echoes_config(cnf):
    _, _, err = call("count", "--seed", 5, "--verbose", cnf)
    cfg = json.loads(err.splitlines()[0][len("c config "):])
    assert cfg["seed"] == 5 and cfg["subcommand"] == "count"


def test_projection_warning(tmp_path):
    p = tmp_path / "p.cnf"
    p.write_text("p cnf 3 1\nc ind 1 0\n1 2 3 0\n")
    _, _, err = call("sample", "--seed", 0, "-N", 2, p)
    assert "not an independent support" in err


def test_console_entry_point(cnf):
    r = subprocess.run([sys.executable, "-m", "cellcount.cli", "count", "--seed", "1", str(cnf)],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("s mc 6")


def test_count_routes_dnf_to_dnf_oracle(tmp_path):
    p = tmp_path / "d.cnf"
    p.write_text("p dnf 4 2\n1 2 0\n-3 0\n")
    code, out, _ = call("count", "--seed", 0, p)
    rec = json.loads(out.splitlines()[1])
    assert code == EXIT_OK and rec["oracle"] == "dnf" and rec["estimate"] == 10
