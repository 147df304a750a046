"""Acceptance criteria, one test each.  Every test prints a single PASS/FAIL line."""

import time
from math import factorial

import pytest

from cancellab import gb
from cancellab.errors import BoundExceeded, NoSliceWithinBound, NotInverse
from cancellab.lab import catalog
from cancellab.lab.cli import run_cli
from cancellab.lab.report import MODULO_CITATION, VERIFIED, recheck_report
from cancellab.lab.scenarios import (scenario_corollary3, scenario_danielewski, scenario_foundations, scenario_phi,
                                     scenario_remark3, scenario_theorem1)
from cancellab.lnd import check_locally_nilpotent, find_slice, make_derivation
from cancellab.poly import P
from cancellab.ring import RingMap, present, verify_iso

from oracle import bounded_member, random_instances

_reports: dict = {}


@pytest.fixture
def verdict(capsys):
    """Print ``PASS``/``FAIL`` for the criterion, then re-raise any failure."""
    state = {}

    def record(number, label, check):
        t0 = time.perf_counter()
        try:
            note = check()
        except BaseException as exc:
            state["line"] = f"FAIL criterion {number}: {label} ({type(exc).__name__}: {exc})"
            raise
        else:
            state["line"] = f"PASS criterion {number}: {label} [{time.perf_counter() - t0:.2f}s]" + (
                f" {note}" if note else "")
        finally:
            with capsys.disabled():
                print("\n" + state["line"])

    return record


def _verified(rep):
    bad = [(c.name, c.status, c.reason) for c in rep.claims if c.status not in (VERIFIED, MODULO_CITATION)]
    assert not bad, bad


def test_criterion_1_foundations_sweep(verdict):
    def check():
        t0 = time.perf_counter()
        for d in (1, 2, 3):
            for l in (2, 3):
                rep = scenario_foundations(d, l)
                _verified(rep)
                E = catalog.entry(d, l)
                assert rep.claim("f in kernel").status == VERIFIED
                nil = rep.claim("local nilpotency").detail
                assert nil["lengths"]["z"] == l + 1
                assert P(nil["top_z"], E.U.vars, E.field) == E.U.element(f"{factorial(l)}*x^{d * (l - 1)}")
                assert rep.claim("fixed-point free").detail["exponent"] <= d
                assert rep.claim("exponential round trip").status == VERIFIED
                _reports[f"foundations{d}{l}"] = rep
        elapsed = time.perf_counter() - t0
        assert elapsed < 10, elapsed
        return "6 instances"

    verdict(1, "foundations sweep over (d,l) in {1,2,3}x{2,3}", check)


def test_criterion_2_phi_sweep(verdict):
    def check():
        t0 = time.perf_counter()
        for d in (1, 2, 3):
            for l in (2, 3):
                rep = scenario_phi(d, l)
                _verified(rep)
                E = catalog.entry(d, l)
                pull = P(rep.claim("pullback identity").detail["pullback"], E.SA.vars, E.field)
                assert E.SA.equal(pull, E.SA.element(f"u^{l}*(Y^{l} + X - X^{d}*Z)"))
                assert rep.claim("Phi isomorphism").status == VERIFIED
                assert rep.claim("equivariance of lifted derivation").status == VERIFIED
                _reports[f"phi{d}{l}"] = rep
        elapsed = time.perf_counter() - t0
        assert elapsed < 30, elapsed

    verdict(2, "pullback, monomial inverse and equivariance sweep", check)


def test_criterion_3_danielewski(verdict):
    def check():
        t0 = time.perf_counter()
        rep = scenario_danielewski()
        _verified(rep)
        data = rep.claim("cylinder isomorphism").detail
        assert set(data["forward"]) == {"x", "y", "z", "w"}
        assert time.perf_counter() - t0 < 300
        _reports["danielewski"] = rep

    verdict(3, "Danielewski cylinder isomorphism at default bounds", check)


def test_criterion_4_theorem1(verdict):
    def check():
        t0 = time.perf_counter()
        rep = scenario_theorem1(1, 2, 2)
        _verified(rep)
        assert rep.parameters == {"d": 1, "dprime": 2, "l": 2}
        assert time.perf_counter() - t0 < 1800
        _reports["theorem1"] = rep

    verdict(4, "U_{1,2} x A1 ~ U_{2,2} x A1 certified", check)


def test_criterion_5_corollary3(verdict):
    def check():
        t0 = time.perf_counter()
        rep = scenario_corollary3(2, 3, 2)
        _verified(rep)
        lift = rep.claim("lift through cover").detail
        assert lift["images"]["t"] == "0"
        assert all(n >= 1 for n in lift["chain_lengths"].values())
        ev = rep.claim("x not in kernel").detail["evidence"]
        assert ev != "0"
        assert rep.claims[-1].status == MODULO_CITATION
        assert time.perf_counter() - t0 < 600
        _reports["corollary3"] = rep
        return f"D(x) = {ev}"

    verdict(5, "LND on X_{2,3,2} x A1 with t in kernel moving x", check)


def test_criterion_6_remark3(verdict):
    def check():
        t0 = time.perf_counter()
        for d in (1, 2):
            rep = scenario_remark3(d, 2)
            _verified(rep)
            assert rep.claim("chart slice").detail["slice"] == ("y*w_x" if d == 1 else f"y*w_x^{d}")
            _reports[f"remark3{d}"] = rep
        assert time.perf_counter() - t0 < 5

    verdict(6, "kernel contains x and t; chart slice y x^-d", check)


def test_criterion_7_engine_properties(verdict, tmp_path):
    def check():
        for vars, gens, p in random_instances():
            G = gb.buchberger(gens)
            assert G.contains(p) == bounded_member(p.terms, [g.terms for g in gens], len(vars), 4)
        reports = _reports or {"danielewski": scenario_danielewski(), "theorem1": scenario_theorem1(1, 2, 2)}
        entries = 0
        for rep in reports.values():
            for name, ok, msg in recheck_report(rep.to_json()):
                assert ok, (rep.scenario, name, msg)
                entries += int(msg.split()[0])
        outs = []
        for jobs in (1, 2, 8):
            path = tmp_path / f"r{jobs}.json"
            assert run_cli(["verify", "danielewski", "theorem1", "--jobs", str(jobs), "--out", str(path)]) == 0
            outs.append(path.read_bytes())
        assert outs[0] == outs[1] == outs[2]
        V = "a b c d"
        cyc = [P("a + b + c + d", V), P("a*b + b*c + c*d + d*a", V),
               P("a*b*c + b*c*d + c*d*a + d*a*b", V), P("a*b*c*d - 1", V)]
        bases = [gb.buchberger(cyc, workers=w).serialize() for w in (1, 2, 8)]
        assert bases[0] == bases[1] == bases[2]
        return f"200 oracle cases, {entries} evidence entries re-expanded"

    verdict(7, "oracle agreement, recheck, worker-count invariance", check)


def test_criterion_8_negative_controls(verdict):
    def check():
        E = catalog.entry(1, 2)
        with pytest.raises(NoSliceWithinBound):
            find_slice(E.D, 6)
        R = present(["y"])
        with pytest.raises(BoundExceeded):
            check_locally_nilpotent(make_derivation(R, {"y": "y"}), 10)
        Qx = present(["x"])
        with pytest.raises(NotInverse):
            verify_iso(RingMap(Qx, Qx, {"x": "x + 1"}), RingMap(Qx, Qx, {"x": "x - 2"}))

    verdict(8, "no slice at bound 6, y d/dy rejected, mismatched iso rejected", check)
