import json

import pytest

from scl_forge.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cl_upper(capsys):
    code, out, _ = run(capsys, "cl-upper", "--word", "[a,b]^2", "--mode", "ordinary", "--max-terms", "2")
    d = json.loads(out)
    assert code == 0 and d["schema"] == "scl-forge/v1" and d["cl_upper"] == 2 and d["verified"]


def test_cl_upper_not_in_subgroup(capsys):
    code, _, err = run(capsys, "cl-upper", "--word", "a")
    assert code == 2 and "error" in err


def test_chain_norm(tmp_path, capsys):
    pair = tmp_path / "pair.json"
    pair.write_text(json.dumps({"rank": 2, "quotient_matrix": [[1, 0]]}))
    chain = tmp_path / "c.json"
    chain.write_text(json.dumps({"terms": [{"word": "b", "coeff": 1}, {"word": "aBA", "coeff": 1}, {"word": "baBA", "coeff": -1}]}))
    code, out, _ = run(capsys, "--pair", str(pair), "chain-norm", "--chain", str(chain), "--L", "2")
    d = json.loads(out)
    assert code == 0 and d["status"] == "optimal" and d["verified"]
    # [a,b] lies in [G,N] for this pair but not for the full abelianization
    ab = tmp_path / "ab.json"
    ab.write_text(json.dumps({"terms": [{"word": "abAB", "coeff": 1}]}))
    code, out, _ = run(capsys, "--pair", str(pair), "chain-norm", "--chain", str(ab), "--L", "1")
    assert code == 0 and json.loads(out)["verified"]
    assert run(capsys, "chain-norm", "--chain", str(ab), "--L", "1")[0] == 3


def test_chain_norm_infeasible(tmp_path, capsys):
    chain = tmp_path / "c.json"
    # [a,b] lies in N but has no mixed filling under the full abelianization
    chain.write_text(json.dumps({"terms": [{"word": "abAB", "coeff": 1}]}))
    code, out, _ = run(capsys, "chain-norm", "--chain", str(chain), "--L", "2")
    assert code == 3 and json.loads(out)["status"] == "infeasible"
    chain.write_text(json.dumps({"terms": [{"word": "ab", "coeff": 1}]}))
    assert run(capsys, "chain-norm", "--chain", str(chain))[0] == 2


def test_scl_word_and_json_out(tmp_path, capsys):
    dest = tmp_path / "r.json"
    code, out, _ = run(capsys, "scl", "--word", "[a,b]", "--mode", "ordinary", "--kmax", "2", "--L", "2",
                       "--json-out", str(dest))
    assert code == 0 and str(dest) in out
    d = json.loads(dest.read_text())
    assert d["interval"]["lower"] == "1/4" and d["verified"]


def test_scl_both(capsys):
    code, out, _ = run(capsys, "scl", "--word", "[a,[a,b]]", "--mode", "both", "--kmax", "1", "--L", "2")
    d = json.loads(out)
    assert code == 0 and all(d["checks"].values())


def test_coarse(tmp_path, capsys):
    s = tmp_path / "s.json"
    s.write_text(json.dumps({"points": ["x", "y", "z"], "dist": [[0, 1, "inf"], [1, 0, "inf"], ["inf", "inf", 0]]}))
    code, out, _ = run(capsys, "coarse", "--sample", str(s), "--A", "x", "--B", "y")
    d = json.loads(out)
    assert code == 0 and d["asymptotic"] and d["scope"] == "within-sample"
    code, out, _ = run(capsys, "coarse", "--sample", str(s), "--A", "x", "--B", "z")
    assert code == 0 and not json.loads(out)["asymptotic"]
    s.write_text(json.dumps({"points": ["x", "y"], "dist": [[0, 1], [2, 0]]}))
    assert run(capsys, "coarse", "--sample", str(s), "--A", "x", "--B", "y")[0] == 2


def test_iotakernel(capsys):
    code, out, _ = run(capsys, "iotakernel", "--n", "3")
    d = json.loads(out)
    assert code == 0 and d["status"] == "pass"
    assert [c["witness"]["bound"] for c in d["checks"]] == ["3/2", "3/4", "3/8", "3/16"]


def test_properties_mutation_fails(capsys):
    counts = ["words=5", "boundary=5", "hnf=5", "qm=5", "oracle=5", "scaling=1", "gamma3=1",
              "triangle=1", "semihom=1", "embedding=1", "coarse=1"]
    argv = ["properties", "--kmax", "1", "--L", "2", "--mutate", "defect_bound"]
    for c in counts:
        argv += ["--count", c]
    code, out, _ = run(capsys, *argv)
    assert code == 1 and json.loads(out)["status"] == "fail"


def test_usage_errors(tmp_path, capsys):
    assert run(capsys, "properties", "--count", "bogus=1")[0] == 2
    assert run(capsys, "scl", "--chain", str(tmp_path / "missing.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"terms": [["ab", 1]]}))
    assert run(capsys, "chain-norm", "--chain", str(bad))[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["scl"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["--threads", "0", "iotakernel"])
    assert exc.value.code == 2
