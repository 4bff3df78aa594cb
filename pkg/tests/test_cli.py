import json
import subprocess
import sys

import pytest

import bvreduce.verify as verify_mod
from bvreduce.cli import EXIT_INVALID, EXIT_NOT_GENERIC, EXIT_OK, EXIT_VERIFY_FAILED, main, result_from_json


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def term(exp, re, im=(0, 1)):
    return {"exp": list(exp), "re": list(re), "im": list(im)}


CUBIC_PROBLEM = {
    "n": 1,
    "action": [term((3,), (1, 1))],
    "observable": [term((3,), (1, 1))],
}


def test_reduce_cubic(tmp_path, capsys):
    inp = write(tmp_path / "p.json", CUBIC_PROBLEM)
    out = tmp_path / "r.json"
    assert main(["reduce", inp, "-o", str(out)]) == EXIT_OK
    data = json.loads(out.read_text())
    assert data["basis"] == [[0], [1]]
    assert data["coefficients"] == [
        {"im": [0, 1], "re": [-1, 3]},
        {"im": [0, 1], "re": [0, 1]},
    ]
    assert data["diagnostics"]["genericity"] == "ok"


def test_reduce_round_trip_byte_stable(tmp_path):
    inp = write(tmp_path / "p.json", CUBIC_PROBLEM)
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    assert main(["reduce", inp, "-o", str(out1)]) == EXIT_OK
    data = json.loads(out1.read_text())
    jc = result_from_json(data)
    from bvreduce import JacClass, Scalar, jac_basis, q

    assert jc == JacClass(jac_basis(1, 3), {(0,): Scalar(q(-1, 3))})
    # byte-stability: a second run serializes identically
    assert main(["reduce", inp, "-o", str(out2)]) == EXIT_OK
    b1 = out1.read_bytes()
    b2 = out2.read_bytes()
    # timing differs; everything else must be byte-identical
    d1, d2 = json.loads(b1), json.loads(b2)
    d1["diagnostics"].pop("seconds")
    d2["diagnostics"].pop("seconds")
    assert json.dumps(d1, sort_keys=True) == json.dumps(d2, sort_keys=True)


def test_reduce_failure_quartic_exit_2(tmp_path, capsys):
    problem = {
        "n": 2,
        "action": [
            term((4, 0), (1, 1)),
            term((3, 1), (2, 1)),
            term((1, 3), (2, 1)),
            term((0, 4), (1, 1)),
        ],
        "observable": [term((2, 2), (1, 1))],
    }
    inp = write(tmp_path / "p.json", problem)
    assert main(["reduce", inp, "-o", "-"]) == EXIT_NOT_GENERIC
    err = capsys.readouterr().err
    assert "weight 4" in err


def test_malformed_json_exit_3(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["reduce", str(bad)]) == EXIT_INVALID


def test_schema_violations_exit_3(tmp_path):
    cases = [
        {"action": [term((3,), (1, 1))]},  # missing n
        {"n": 1, "observable": [term((3,), (1, 1))]},  # missing action
        {"n": 1, "action": [term((3,), (1, 0))], "observable": []},  # zero denominator
        {"n": 2, "action": [term((3,), (1, 1))], "observable": []},  # exp length mismatch
    ]
    for i, p in enumerate(cases):
        inp = write(tmp_path / f"c{i}.json", p)
        assert main(["reduce", inp]) == EXIT_INVALID, p


def test_wick_command(tmp_path):
    problem = {
        "n": 1,
        "action": [term((2,), (-1, 2))],
        "observable": [term((4,), (1, 1))],
    }
    inp = write(tmp_path / "p.json", problem)
    out = tmp_path / "w.json"
    assert main(["wick", inp, "-o", str(out)]) == EXIT_OK
    data = json.loads(out.read_text())
    assert data["value"] == {"re": [3, 1], "im": [0, 1]}


def test_wick_singular_exit_2(tmp_path):
    problem = {
        "n": 2,
        "action": [term((2, 0), (1, 2)), term((1, 1), (1, 1)), term((0, 2), (1, 2))],
        "observable": [term((0, 0), (1, 1))],
    }
    inp = write(tmp_path / "p.json", problem)
    assert main(["wick", inp]) == EXIT_NOT_GENERIC


def test_basis_command(tmp_path):
    out = tmp_path / "b.json"
    assert main(["basis", "--n", "2", "--d", "3", "-o", str(out)]) == EXIT_OK
    data = json.loads(out.read_text())
    assert data["size"] == 4
    assert data["basis"] == [[0, 0], [0, 1], [1, 0], [1, 1]]


def test_hbar_command(tmp_path):
    problem = {
        "n": 1,
        "observable": [term((1,), (1, 1))],
        "hbar": {
            "K": 2,
            "a": [[{"re": [1, 1]}]],
            "vertices": {"3": [term((3,), (1, 6))]},
        },
    }
    inp = write(tmp_path / "p.json", problem)
    out = tmp_path / "h.json"
    assert main(["hbar", inp, "-K", "2", "-o", str(out)]) == EXIT_OK
    data = json.loads(out.read_text())
    assert data["series"][0] == {"re": [0, 1], "im": [0, 1]}
    assert data["series"][1] == {"re": [1, 2], "im": [0, 1]}


def test_oracle_command_pass(tmp_path):
    problem = {
        "n": 1,
        "action": [term((3,), (1, 1))],
        "observable": [term((6,), (1, 1))],
    }
    inp = write(tmp_path / "p.json", problem)
    out = tmp_path / "o.json"
    assert main(["oracle", inp, "--tol", "1e-6", "-o", str(out)]) == EXIT_OK
    data = json.loads(out.read_text())
    assert data["passed"] is True
    assert len(data["contours"]) == 2


def test_oracle_command_not_allowable(tmp_path):
    problem = {
        "n": 1,
        "action": [term((3,), (1, 1))],
        "observable": [term((2,), (1, 1))],
    }
    contour = {
        "waypoints": [[0.0, 0.0]],
        "end_directions": [[1.0, 0.0], [-0.5, 0.866025403784]],
        "ray_length": 40.0,
    }
    inp = write(tmp_path / "p.json", problem)
    cfile = write(tmp_path / "c.json", contour)
    assert main(["oracle", inp, "--contour", cfile]) == EXIT_NOT_GENERIC


def test_verify_ok(capsys):
    assert main(["verify", "--n", "2", "--d", "3", "--trials", "20", "--seed", "42"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "seed=42" in out
    assert "FAIL" not in out


def test_verify_zero_trials(capsys):
    assert main(["verify", "--trials", "0"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "0 checks" in out


def test_verify_sign_flip_trips_gate(monkeypatch, capsys):
    """A deliberately sign-flipped reduction must fail the exactness invariant."""
    from bvreduce import reduce_full
    from bvreduce.bvdiff import d_div
    from bvreduce.reduce import session_for, tau_diag

    def flipped(action, f):
        # wrong-sign divergence route: reduce f - 2*div(eta(f)) style corruption
        sess = session_for(action)
        good = sess.reduce(f)
        bad = tau_diag(d_div(sess.retraction.eta(f)), action.d).scale(2)
        return good + bad

    monkeypatch.setattr(verify_mod, "DEFAULT_REDUCE", flipped)
    code = main(["verify", "--n", "2", "--d", "3", "--trials", "15", "--seed", "7"])
    assert code == EXIT_VERIFY_FAILED
    out = capsys.readouterr().out
    assert "tau(d_bv(v)) == 0" in out


def test_entry_point_subprocess(tmp_path):
    inp = write(tmp_path / "p.json", CUBIC_PROBLEM)
    proc = subprocess.run(
        [sys.executable, "-m", "bvreduce.cli", "reduce", inp, "-o", "-"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    data = json.loads(proc.stdout)
    assert data["coefficients"][0] == {"im": [0, 1], "re": [-1, 3]}
