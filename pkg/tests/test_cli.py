import json
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from minitwistor import cli
from minitwistor.errors import SignatureMismatch
from minitwistor.reports import RunConfig, dumps, plain

GOLDEN = Path(__file__).parent / "golden"


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = cli.main([*argv, "--out", str(out), "--golden"])
    return code, out


def test_surface_info_matches_golden(tmp_path):
    code, out = run(tmp_path, "surface-info", "--mode", "exact")
    assert code == 0
    assert (out / "surface.json").read_text() == (GOLDEN / "surface_exact.json").read_text()


def test_verify_identities_matches_golden(tmp_path):
    code, out = run(tmp_path, "verify-identities", "--mode", "exact")
    assert code == 0
    assert (out / "identities.json").read_text() == (GOLDEN / "identities_exact.json").read_text()


def test_pencil_structure_matches_golden(tmp_path):
    golden = json.loads((GOLDEN / "pencil_structure.json").read_text())
    for name, extra in [("generic", []), ("merged", ["--point", "3,3,1,0,1", "--coords", "complex"])]:
        code, out = run(tmp_path, "pencil", *extra, name=name)
        assert code == 0
        d = json.loads((out / "pencil.json").read_text())
        got = {"order": d["order"], "merged": d["merged"], "tableOk": d["tableOk"],
               "intervals": [[i["name"], i["tag"]] for i in d["intervals"]],
               "members": [[m["name"], m["tag"]] for m in d["members"]]}
        assert got == golden[name]
        svgs = sorted(p.name for p in out.glob("trace_*.svg"))
        assert len(svgs) == len(d["intervals"]) + len(d["members"])
        assert "timestamp" not in (out / "circle.svg").read_text()


def test_runs_are_byte_identical(tmp_path):
    _, a = run(tmp_path, "zoll-sweep", "--samples", "2", name="a")
    _, b = run(tmp_path, "zoll-sweep", "--samples", "2", name="b")
    for f in ("zoll_sweep.csv", "zoll_summary.json", "manifest.json"):
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_timestamp_outside_golden_mode(tmp_path):
    out = tmp_path / "t"
    assert cli.main(["geodesic", "--out", str(out)]) == 0
    assert "timestamp" in (out / "geodesic.svg").read_text()
    assert "timings" in json.loads((out / "manifest.json").read_text())


def test_no_spheres_surface_info(tmp_path):
    code, out = run(tmp_path, "surface-info", "--alpha", "1", "--beta", "2", "--gamma", "3")
    assert code == 0
    doc = json.loads((out / "surface.json").read_text())
    assert doc["realLocus"] == "none-or-torus" and doc["sphereOpsEnabled"] is False


@pytest.mark.parametrize("argv", [
    ["surface-info", "--alpha", "1", "--beta", "1", "--gamma", "3"],
    ["verify-identities", "--mode", "exact", "--alpha", "10", "--beta", "-3", "--gamma", "20"],
    ["surface-info", "--tolerance.closure", "-1"],
    ["pencil", "--alpha", "1", "--beta", "2", "--gamma", "3"],
    ["pencil", "--point", "1,1,1,1,1"],
    ["nullcone", "--hyperplane", "0,0,1,0,-1"],
])
def test_invalid_input_exit_code(tmp_path, argv):
    assert run(tmp_path, *argv)[0] == cli.EXIT_PARAMS


def test_pole_exit_code(tmp_path):
    assert run(tmp_path, "pencil", "--point", "0,0,5,3,4")[0] == cli.EXIT_POLE


def test_identity_failure_exit_code(tmp_path, monkeypatch):
    from minitwistor import identities

    real = identities.verify_identities

    def broken(S, tol=1e-9):
        res, t, _ = real(S, tol)
        res[0] = identities.IdentityCheck(res[0].name, False, "forced")
        return res, t, False

    monkeypatch.setattr(identities, "verify_identities", broken)
    assert run(tmp_path, "verify-identities")[0] == cli.EXIT_IDENTITY


def test_signature_exit_code(tmp_path, monkeypatch):
    from minitwistor import weyl

    def boom(*a, **k):
        raise SignatureMismatch("forced")

    monkeypatch.setattr(weyl, "conformal_form", boom)
    assert run(tmp_path, "nullcone")[0] == cli.EXIT_SIGNATURE


def test_config_file_and_override(tmp_path):
    cfg = RunConfig(alpha=Fraction(10), beta=-3, gamma=20, seed=4)
    path = tmp_path / "cfg.json"
    path.write_text(cfg.to_json())
    out = tmp_path / "o"
    assert cli.main(["surface-info", "--config", str(path), "--seed", "9", "--out", str(out), "--golden"]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["config"]["seed"] == 9 and man["config"]["alpha"] == "10"


fractions = st.fractions(min_value=-50, max_value=50, max_denominator=20)
positive = st.floats(min_value=1e-15, max_value=1.0, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(a=fractions, b=fractions, c=st.one_of(fractions, st.integers(-9, 9)), seed=st.integers(0, 2**31),
       mode=st.sampled_from(["exact", "approx"]), tol=positive, theta=st.integers(4, 500))
def test_config_round_trip(a, b, c, seed, mode, tol, theta):
    cfg = RunConfig(alpha=a, beta=b, gamma=c, mode=mode, seed=seed,
                    tolerance={"projective": tol, "closure": tol, "fit_residual": tol}, grid={"theta": theta, "phi": 8})
    back = RunConfig.from_json(cfg.to_json())
    assert back.to_json() == cfg.to_json()
    assert back.digest() == cfg.digest()


def test_number_formatting():
    assert plain(Fraction(3, 7)) == "3/7"
    assert plain(Fraction(4, 1)) == "4"
    assert dumps({"x": 0.1}) == '{\n  "x": 0.1\n}\n'
