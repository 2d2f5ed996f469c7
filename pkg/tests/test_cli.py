import io
import json
import subprocess
import sys

import pytest

from qkdv import cli, suites
from qkdv.hierarchy_kdv import CheckFailure


def run(*argv, stdin=None, monkeypatch=None):
    out = io.StringIO()
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    rc = cli.run(list(argv), out)
    return rc, out.getvalue()


def test_ham_h1():
    rc, out = run("ham", "--N", "2", "--n", "1")
    assert rc == 0
    assert out.strip() == "H_1 = -t1[0]"


def test_ham_cwf():
    rc, out = run("ham", "--N", "2", "--n", "2", "--construction", "cwf", "--window", "1")
    assert rc == 0 and out.startswith("h_2 = ")


def test_flow_n3_closed_form():
    rc, out = run("flow", "--N", "3", "--n", "1", "--window", "1")
    assert rc == 0
    assert "d t1 / d tau_1 = " in out and "d t2 / d tau_1 = " in out
    assert "matches" in out


def test_flow_json():
    rc, out = run("flow", "--N", "2", "--n", "1", "--format", "json")
    d = json.loads(out)
    assert rc == 0 and d["pass"] and d["result"]["closed_form_matches"]


def test_bracket():
    rc, out = run("bracket", "t1[1]", "t1[-1]", "--which", "1")
    assert rc == 0 and out.strip() == "{t1[1], t1[-1]}_1 = ((-1 + q^2)/q)"
    rc, out = run("bracket", "lam1[1]", "lam2[-1]", "--N", "2")
    assert rc == 0 and out.startswith("{lam1[1], lam2[-1]} = ")


def test_bracket_usage_errors():
    assert run("bracket", "t1[9]", "t1[0]")[0] == 2
    assert run("bracket", "t1[0]", "lam1[0]")[0] == 2
    assert run("bracket", "x", "t1[0]")[0] == 2


def test_bad_config():
    assert run("ham", "--N", "1")[0] == 2
    assert run("ham", "--window", "0")[0] == 2


def test_root_operator_text():
    rc, out = run("root", "--operator", "D^2 - t1(z) D + 1", "--K", "3")
    assert rc == 0
    assert "P^2 = L down to D^-3: yes" in out


def test_root_operator_stdin(monkeypatch):
    rc, out = run("root", "--operator", "-", "--K", "2", "--format", "json",
                  stdin="D^3 - t1(z) D^2 + t2(z) D - t3(z)", monkeypatch=monkeypatch)
    d = json.loads(out)
    assert rc == 0 and d["result"]["power_check"]


def test_root_operator_file(tmp_path):
    f = tmp_path / "L.txt"
    f.write_text("D^2 - 2 D + 1")
    rc, out = run("root", "--operator", "@%s" % f)
    assert rc == 0 and "P = L^(1/2) = D - 1" in out


def test_flow_operator():
    rc, out = run("flow", "--operator", "D^2 - t1(z) D + 1", "--n", "1", "--window", "1")
    assert rc == 0 and out.startswith("[L, (L^(1/2))_+] = ")
    rc, out = run("flow", "--operator", "D^2 + lam1(z) D + u2(z)", "--window", "1")
    assert rc == 0
    assert run("flow", "--operator", "foo1(z) D")[0] == 2
    assert run("flow", "--operator", "t1(z)")[0] == 2


def test_miura():
    rc, out = run("miura", "--N", "2", "--window", "1")
    assert rc == 0
    assert out.splitlines()[0].startswith("t1 -> ")


@pytest.mark.parametrize("mode", ["affine", "finite", "sine-gordon"])
def test_toda(mode):
    rc, out = run("toda", "--N", "2", "--window", "1", "--mode", mode)
    assert rc == 0
    assert "exact up to degree 3" in out


def test_toda_sine_gordon_needs_n2():
    assert run("toda", "--N", "3", "--mode", "sine-gordon")[0] == 2


@pytest.mark.parametrize("target", ["virasoro", "heisenberg", "toda", "hamiltonians"])
def test_limit(target):
    rc, out = run("limit", "--target", target, "--window", "1")
    assert rc == 0 and out.strip()


def test_verify_json_schema():
    rc, out = run("verify", "limits", "--format", "json", "--no-timing")
    d = json.loads(out)
    assert rc == 0
    assert set(d) == {"suite", "config", "checks", "pass"}
    assert d["pass"] is True
    for c in d["checks"]:
        assert set(c) <= {"name", "anchor", "status", "witness", "ms"}
        assert c["status"] == "pass" and c["ms"] == 0 and c["anchor"]


def test_verify_deterministic():
    a = run("verify", "poisson", "--format", "json", "--no-timing")[1]
    b = run("verify", "poisson", "--format", "json", "--no-timing")[1]
    assert a == b


def test_verify_numeric_config(monkeypatch):
    monkeypatch.setenv("QKDV_Q0", "5/3")
    rc, out = run("verify", "limits", "--coeffs", "numeric", "--format", "json", "--no-timing")
    d = json.loads(out)
    assert rc == 0 and d["config"]["q0"] == "5/3" and d["config"]["mode"] == "numeric"


def test_degcap_env(monkeypatch):
    monkeypatch.setenv("QKDV_DEGCAP", "2")
    rc, out = run("toda", "--N", "2", "--window", "1")
    assert rc == 0 and "exact up to degree 2" in out


def test_failure_exit_code(monkeypatch):
    def failing(cfg):
        def boom():
            raise CheckFailure("forced", "t1[0]")
        return [suites.Check("forced", "always fails", boom)]

    monkeypatch.setitem(suites.BUILDERS, "limits", failing)
    rc, out = run("verify", "limits", "--format", "json", "--no-timing")
    d = json.loads(out)
    assert rc == 1 and d["pass"] is False
    assert d["checks"][0]["status"] == "fail" and d["checks"][0]["witness"] == "t1[0]"
    rc, out = run("verify", "limits")
    assert rc == 1 and "witness: t1[0]" in out


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "qkdv", "ham", "--n", "1"], capture_output=True, text=True)
    assert p.returncode == 0 and p.stdout.strip() == "H_1 = -t1[0]"
    p = subprocess.run([sys.executable, "-m", "qkdv", "nosuch"], capture_output=True, text=True)
    assert p.returncode == 2
