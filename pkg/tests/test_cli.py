"""Command line surface: documents, commands, exit codes, artifacts."""

import csv
import json

import numpy as np
import numpy.testing as npt
import pytest

from maslovflow import cli
from maslovflow.errors import ConfigError

OSC = {
    "name": "osc",
    "kind": "second_order",
    "m": 1,
    "T": float(np.pi),
    "p": [["1"]],
    "q": [["0"]],
    "r": [["-1.5*s"]],
    "boundary": {"r_subspace": None},
    "numerics": {"steps": 512},
    "expected": {"sf": -1, "mas": -1,
                 "provenance": "lowest eigenvalue 1 - 1.5 s crosses at s = 2/3"},
}

ROT = {
    "kind": "first_order",
    "m": 1,
    "T": 1.0,
    "j": [["1i"]],
    "b": [["0"]],
    "boundary": {"w_path": [["1"], ["cos(2*pi*s)+1i*sin(2*pi*s)"]]},
    "numerics": {"steps": 512},
}

PAIR = {
    "kind": "pair_path",
    "m": 1,
    "j": [["1i", "0"], ["0", "-1i"]],
    "lam": [["1"], ["cos(2*pi*s)+1i*sin(2*pi*s)"]],
    "mu": [["1"], ["1"]],
    "expected": {"mas": 1, "provenance": "one full upward relative rotation"},
}


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_verify_agreeing_document(tmp_path, capsys):
    out = tmp_path / "out"
    code = cli.main(["verify", write(tmp_path, OSC), "--out", str(out)])
    assert code == 0
    assert "osc: sf=-1 mas=-1 agree" in capsys.readouterr().out
    report = json.loads((out / "osc.json").read_text())
    assert (report["sf"], report["mas"], report["agree"]) == (-1, -1, True)
    with open(out / "osc_sf.csv") as fh:
        header = next(csv.reader(fh))
    assert header[0] == "s" and header[1].startswith("lambda_")
    with open(out / "osc_mas.csv") as fh:
        header = next(csv.reader(fh))
    assert header[1].startswith("coord_")


def test_verify_multiple_documents(tmp_path):
    code = cli.main(["verify", write(tmp_path, OSC, "a.json"),
                     write(tmp_path, ROT, "b.json")])
    assert code == 0


def test_verify_builtin_reference(capsys):
    assert cli.main(["verify", "@S4"]) == 0
    assert "S4" in capsys.readouterr().out


def test_sf_and_maslov_print_bare_integers(tmp_path, capsys):
    cfg = write(tmp_path, OSC)
    assert cli.main(["sf", cfg]) == 0
    assert capsys.readouterr().out == "-1\n"
    assert cli.main(["maslov", cfg]) == 0
    assert capsys.readouterr().out == "-1\n"


def test_maslov_on_pair_path(tmp_path, capsys):
    cfg = write(tmp_path, PAIR)
    assert cli.main(["maslov", cfg]) == 0
    assert capsys.readouterr().out == "1\n"
    assert cli.main(["verify", cfg]) == 0


def test_sf_on_pair_path_is_config_error(tmp_path, capsys):
    assert cli.main(["sf", write(tmp_path, PAIR)]) == 3
    assert "pair path" in capsys.readouterr().err


def test_exit_1_on_pinned_mismatch(tmp_path, capsys):
    doc = dict(ROT)
    doc["expected"] = {"sf": 5, "mas": 5, "provenance": "wrong on purpose"}
    assert cli.main(["verify", write(tmp_path, doc)]) == 1
    assert "not reproduced" in capsys.readouterr().err


def test_exit_2_on_unresolved_family(tmp_path, capsys):
    doc = dict(ROT)
    doc["numerics"] = {"steps": 256, "initial_segments": 1, "max_depth": 0}
    cfg = write(tmp_path, doc)
    assert cli.main(["verify", cfg]) == 2
    assert "UnresolvedFamily" in capsys.readouterr().err
    assert cli.main(["sf", cfg]) == 2


@pytest.mark.parametrize(
    "mangle",
    [
        lambda d: d.pop("T"),                       # schema violation
        lambda d: d.update(b=[["s +* t"]]),         # expression syntax
        lambda d: d.update(b=[["q"]]),              # unknown identifier
        lambda d: d.update(interval=[0, 1]),        # interval on a BVP kind
        lambda d: d.update(boundary={"r_subspace": None}),  # wrong boundary kind
        lambda d: d.update(j=[["1i", "0"]]),        # wrong shape
        lambda d: d.update(boundary={"w_path": [["t"], ["1"]]}),  # t in frame
    ],
)
def test_exit_3_on_bad_documents(tmp_path, mangle, capsys):
    doc = json.loads(json.dumps(ROT))
    mangle(doc)
    assert cli.main(["verify", write(tmp_path, doc)]) == 3
    assert capsys.readouterr().err.startswith("error:")


def test_exit_3_on_unreadable_inputs(tmp_path, capsys):
    assert cli.main(["verify", str(tmp_path / "missing.json")]) == 3
    broken = tmp_path / "broken.json"
    broken.write_text("{\"kind\":")
    assert cli.main(["verify", str(broken)]) == 3
    assert cli.main(["verify", "@S9"]) == 3
    capsys.readouterr()


def test_trace_writes_csv(tmp_path, capsys):
    cfg = write(tmp_path, OSC)
    assert cli.main(["trace", cfg, "--what", "eigenvalues",
                     "--out", str(tmp_path)]) == 0
    path = capsys.readouterr().out.strip()
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "s"
    assert all(h.startswith("lambda_") for h in rows[0][1:])
    assert float(rows[1][0]) == 0.0
    assert cli.main(["trace", cfg, "--what", "eigenphases",
                     "--out", str(tmp_path)]) == 0
    path = capsys.readouterr().out.strip()
    with open(path) as fh:
        header = next(csv.reader(fh))
    assert all(h.startswith("coord_") for h in header[1:])


def test_trace_eigenvalues_rejects_pair_path(tmp_path):
    assert cli.main(["trace", write(tmp_path, PAIR),
                     "--what", "eigenvalues"]) == 3


def test_scenarios_listing(capsys):
    assert cli.main(["scenarios"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 5
    assert out[0].startswith("S1")
    assert any("established at run time" in line for line in out)


def test_sweep_smoke(tmp_path, capsys):
    assert cli.main(["sweep", "--seed", "5", "--trials", "1", "--dims", "2",
                     "--suites", "fredholm_index_zero,double_annihilator",
                     "--out", str(tmp_path)]) == 0
    assert "all passed" in capsys.readouterr().out
    summary = json.loads((tmp_path / "sweep.json").read_text())
    assert summary["all_passed"] is True
    assert cli.main(["sweep", "--trials", "0"]) == 3
    assert cli.main(["sweep", "--trials", "1", "--suites", "nope"]) == 3
    capsys.readouterr()


def test_seventeen_digit_floats():
    text = cli._json_render({"x": 0.1, "n": 3, "ok": True, "none": None})
    assert '"x": 0.10000000000000001' in text
    assert '"n": 3' in text
    json.loads(text)


def test_sampled_coefficient_matches_expression():
    # b(s, t) = s (2 t - 1) is bilinear, so a 2 x 2 sample grid is exact
    samples = {"s": [0.0, 1.0], "t": [0.0, 1.0],
               "values": [[[[0.0]], [[0.0]]], [[[-1.0]], [[1.0]]]]}
    fun, shape = cli._coeff_function({"samples": samples}, "b")
    assert shape == (1, 1)
    tt = np.linspace(0.0, 1.0, 9)
    got = fun(0.37, tt)[:, 0, 0]
    npt.assert_allclose(got, 0.37 * (2.0 * tt - 1.0), atol=1e-15)
    # scalar t and out-of-range clamping
    assert fun(0.5, 0.5)[0, 0] == pytest.approx(0.0)
    npt.assert_allclose(fun(2.0, 2.0)[0, 0], 1.0)  # clamped to the corner


def test_sampled_coefficient_complex_entries():
    samples = {"t": [0.0, 1.0], "values": [[[[0.0, 1.0]]], [[[0.0, -1.0]]]]}
    fun, _ = cli._coeff_function({"samples": samples}, "j")
    npt.assert_allclose(fun(0.0, 0.5)[0, 0], 0.0 + 0j, atol=1e-15)
    npt.assert_allclose(fun(0.0, 0.0)[0, 0], 1j)


def test_sampled_document_runs(tmp_path):
    doc = {
        "kind": "second_order", "m": 1, "T": float(np.pi),
        "p": [["1"]], "q": [["0"]],
        "r": {"samples": {"s": [0.0, 1.0], "values": [[[0.0]], [[-1.5]]]}},
        "boundary": {"r_subspace": None},
        "numerics": {"steps": 512},
        "expected": {"sf": -1, "mas": -1, "provenance": "sampled oscillator"},
    }
    assert cli.main(["verify", write(tmp_path, doc)]) == 0


def test_ragged_samples_rejected():
    with pytest.raises(ConfigError):
        cli._coeff_function(
            {"samples": {"t": [0.0, 1.0], "values": [[[0.0]], [[1.0, 2.0]]]}},
            "r",
        )


def test_scenario_from_document_name_defaults(tmp_path):
    sc = cli.scenario_from_document(json.loads(json.dumps(ROT)), "fallback")
    assert sc.name == "fallback"
    doc = dict(OSC)
    sc = cli.scenario_from_document(json.loads(json.dumps(doc)), "x")
    assert sc.name == "osc"
