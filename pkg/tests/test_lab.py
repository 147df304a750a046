import copy
import json

import pytest

from cancellab.lab import catalog
from cancellab.lab.cli import run_cli
from cancellab.lab.evidence import Evidence, RecheckFailure, lit, recheck
from cancellab.lab.report import (FAILED, INCONCLUSIVE, MODULO_CITATION, VERIFIED, ClaimRunner, Report, digest,
                                  recheck_report)
from cancellab.lab.scenarios import (LabConfig, scenario_corollary3, scenario_danielewski, scenario_foundations,
                                     scenario_phi, scenario_remark3, scenario_theorem1)
from cancellab.errors import ParameterError

REPORT_KEYS = {"scenario", "parameters", "claims", "version", "config"}
CLAIM_KEYS = {"name", "anchor", "status", "digest", "wall_time", "certificate", "detail"}


def _all_rechecked(rep):
    results = recheck_report(rep.to_json())
    assert results and all(ok for _, ok, _ in results), results


def test_catalog_parameter_validation():
    with pytest.raises(ParameterError):
        catalog.entry(0, 2)
    with pytest.raises(ParameterError):
        catalog.entry(1, 1)
    for bad in ((1, 3, 2), (2, 2, 2), (2, 4, 2), (2, 2, 3)):
        with pytest.raises(ParameterError):
            catalog.validate_x(*bad)
    catalog.validate_x(2, 3, 2)


def test_catalog_field_choice():
    assert catalog.entry(1, 2).field.is_rational
    assert not catalog.entry(1, 3).field.is_rational


def test_foundations_details():
    rep = scenario_foundations(3, 3)
    assert rep.status == VERIFIED
    nil = rep.claim("local nilpotency").detail
    assert nil["lengths"]["z"] == 4
    assert nil["top_z"] == "6*x^6"
    _all_rechecked(rep)


@pytest.mark.parametrize("d,expected", [(1, 1), (2, 2)])
def test_foundations_freeness_exponent(d, expected):
    rep = scenario_foundations(d, 2)
    assert rep.claim("fixed-point free").detail["exponent"] == expected


def test_phi_pullback():
    rep = scenario_phi(1, 2)
    assert rep.status == VERIFIED
    assert rep.claim("pullback identity").detail["pullback"] == "Y^2*u^2 - X*Z*u^2 + X*u^2"
    _all_rechecked(rep)


def test_danielewski_report_schema_and_recheck():
    rep = scenario_danielewski()
    data = rep.to_json()
    assert set(data) == REPORT_KEYS
    for c in data["claims"]:
        assert CLAIM_KEYS <= set(c) and c["wall_time"] is None
        assert c["digest"] == digest({"certificate": c["certificate"], "detail": c["detail"]})
    assert rep.exit_code() == 0
    _all_rechecked(rep)


def test_danielewski_bound_one_inconclusive():
    rep = scenario_danielewski(LabConfig(max_degree=1))
    assert rep.status == INCONCLUSIVE and rep.exit_code() == 2
    assert "MatchingSearchExhausted" in rep.claims[0].reason


def test_danielewski_against_itself():
    rep = scenario_danielewski(same=True)
    assert rep.status == VERIFIED
    assert rep.claim("carrier with two bundle structures").detail == {"degenerate": True}


def test_theorem1_identity_instance():
    rep = scenario_theorem1(2, 2, 2)
    assert rep.status == VERIFIED
    fwd = rep.claim("cylinder isomorphism").detail["forward"]
    assert all(img == v for v, img in fwd.items())


def test_theorem1_cyclotomic_bound_too_small():
    rep = scenario_theorem1(1, 2, 3, LabConfig(max_degree=2))
    assert rep.status == INCONCLUSIVE


def test_theorem1_stretch_instance_recorded():
    rep = scenario_theorem1(1, 3, 2)
    assert rep.status in (VERIFIED, INCONCLUSIVE)


def test_corollary3_invalid_parameters():
    rep = scenario_corollary3(2, 2, 2)
    assert rep.status == FAILED and rep.claims[0].name == "parameters"
    assert rep.exit_code() == 1


def test_corollary3_last_claim_modulo_citation():
    rep = scenario_corollary3(2, 3, 2)
    assert rep.status == VERIFIED
    assert rep.claims[-1].status == MODULO_CITATION
    assert rep.claim("cleared f-powers").detail["N"] >= 0
    _all_rechecked(rep)


@pytest.mark.parametrize("d", [1, 2])
def test_remark3(d):
    rep = scenario_remark3(d, 2)
    assert rep.status == VERIFIED
    assert rep.claim("y not in kernel").detail["evidence"] == ("x" if d == 1 else f"x^{d}")
    assert rep.claim("chart slice").detail["slice"] == ("y*w_x" if d == 1 else f"y*w_x^{d}")
    _all_rechecked(rep)


def test_recheck_detects_tampering():
    data = scenario_remark3(1, 2).to_json()
    bad = copy.deepcopy(data)
    bad["claims"][0]["detail"]["extra"] = 1
    assert not recheck_report(bad)[0][1]
    # altering a certificate and re-signing it must still fail on expansion
    bad = copy.deepcopy(data)
    cert = bad["claims"][2]["certificate"]
    cert["derivations"]["D"]["images"]["z"] = "3*y"
    bad["claims"][2]["digest"] = digest({"certificate": cert, "detail": bad["claims"][2]["detail"]})
    assert not recheck_report(bad)[2][1]


def test_evidence_rejects_false_zero():
    ev = Evidence()
    R = catalog.entry(1, 2).U
    name = ev.ring(R, "U")
    ev.zero(name, lit(name, R.zero()))
    data = ev.to_json()
    data["entries"][0]["expr"] = ["poly", name, "x"]
    with pytest.raises(RecheckFailure):
        recheck(data)


def test_claim_runner_propagates_prerequisites():
    rep = Report("demo", {})
    run = ClaimRunner(rep)

    def boom(ev):
        from cancellab.errors import NoSliceWithinBound
        raise NoSliceWithinBound(3)

    run.run("a", "first", boom)
    run.run("b", "second", lambda ev: {}, ["a"])
    assert [c.status for c in rep.claims] == [INCONCLUSIVE, INCONCLUSIVE]
    assert rep.exit_code() == 2


def test_reports_byte_identical_across_runs():
    assert scenario_danielewski().dumps() == scenario_danielewski().dumps()


# -- CLI


def test_cli_verify_and_recheck(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run_cli(["verify", "danielewski", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert all(c["status"] == VERIFIED for c in data["claims"])
    assert run_cli(["recheck", str(out)]) == 0
    data["claims"][2]["digest"] = "sha256:0"
    out.write_text(json.dumps(data))
    assert run_cli(["recheck", str(out)]) == 1


def test_cli_exit_codes(tmp_path):
    assert run_cli(["verify", "foundations", "--d", "1", "--l", "2"]) == 0
    assert run_cli(["verify", "theorem1", "--d", "1", "--dprime", "2", "--l", "3", "--max-degree", "2"]) == 2
    assert run_cli(["verify", "corollary3", "--d", "2", "--k", "2", "--l", "2"]) == 1
    assert run_cli(["verify", "nonexistent"]) == 1
    assert run_cli(["verify", "danielewski", "--k", "3"]) == 1
    assert run_cli(["frobnicate"]) == 1


def test_cli_jobs_do_not_change_reports(tmp_path):
    texts = []
    for jobs in (1, 2, 8):
        out = tmp_path / f"t{jobs}.json"
        assert run_cli(["verify", "theorem1", "--jobs", str(jobs), "--out", str(out)]) == 0
        texts.append(out.read_bytes())
    assert texts[0] == texts[1] == texts[2]


def test_cli_multiple_scenarios_in_parallel(tmp_path):
    out = tmp_path / "m.json"
    assert run_cli(["verify", "remark3", "phi", "--jobs", "2", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert [r["scenario"] for r in data] == ["remark3", "phi"]
    assert run_cli(["recheck", str(out)]) == 0


def test_cli_ring_and_lnd_check(tmp_path):
    e = catalog.entry(2, 2)
    ring = tmp_path / "ring.json"
    ring.write_text(json.dumps(e.U.to_json()))
    assert run_cli(["ring", "check", str(ring)]) == 0
    fmap = tmp_path / "map.json"
    fmap.write_text(json.dumps(e.Phi.to_json()))
    assert run_cli(["ring", "check", str(fmap)]) == 0
    pair = tmp_path / "pair.json"
    pair.write_text(json.dumps({"forward": e.Phi.to_json(), "backward": e.Phi_inverse.to_json()}))
    assert run_cli(["ring", "check", str(pair)]) == 0
    broken = e.Phi.to_json()
    broken["images"]["x"] = "X"
    fmap.write_text(json.dumps(broken))
    assert run_cli(["ring", "check", str(fmap)]) == 1
    der = tmp_path / "der.json"
    der.write_text(json.dumps(e.D.to_json()))
    assert run_cli(["lnd", "check", str(der)]) == 0
    der.write_text(json.dumps({"ring": {"vars": ["y"]}, "images": {"y": "y"}}))
    assert run_cli(["lnd", "check", str(der), "--bound", "10"]) == 2
    der.write_text(json.dumps({"ring": {"vars": ["x", "y"], "relations": ["y^2"]}, "images": {"x": "0", "y": "1"}}))
    assert run_cli(["lnd", "check", str(der)]) == 1
    assert run_cli(["recheck", str(tmp_path / "missing.json")]) == 1


def test_direct_route_is_recorded_not_refuted():
    rep = scenario_theorem1(1, 2, 2, LabConfig(route="direct"))
    assert rep.claim("carrier with two bundle structures").status == VERIFIED
    assert rep.claim("cylinder isomorphism").status == INCONCLUSIVE
    assert rep.config["route"] == "direct"
    assert scenario_theorem1(2, 2, 2, LabConfig(route="direct")).status == VERIFIED
