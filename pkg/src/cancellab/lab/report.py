"""Scenario reports: three-valued claims with embedded, re-checkable evidence."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from typing import Callable

from .. import __version__
from ..errors import (BoundExceeded, LabError, MatchingSearchExhausted, NoSliceWithinBound, NotClearable,
                      ResourceBudgetExceeded, StageError)
from .evidence import Evidence, RecheckFailure, recheck as recheck_evidence

VERIFIED = "verified"
FAILED = "failed"
INCONCLUSIVE = "inconclusive-at-bound"
MODULO_CITATION = "verified-modulo-citation"

_AT_BOUND = (NoSliceWithinBound, MatchingSearchExhausted, BoundExceeded, NotClearable, ResourceBudgetExceeded)


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def digest(obj) -> str:
    return "sha256:" + hashlib.sha256(canonical(obj).encode()).hexdigest()


def root_cause(exc: BaseException) -> BaseException:
    while isinstance(exc, StageError):
        exc = exc.cause
    return exc


def classify(exc: BaseException) -> str:
    return INCONCLUSIVE if isinstance(root_cause(exc), _AT_BOUND) else FAILED


@dataclass
class Claim:
    name: str
    anchor: str
    status: str
    certificate: dict | None = None
    detail: dict = field(default_factory=dict)
    wall_time: float | None = None
    reason: str | None = None

    def to_json(self) -> dict:
        out = {"name": self.name, "anchor": self.anchor, "status": self.status,
               "digest": digest({"certificate": self.certificate, "detail": self.detail})
               if self.certificate is not None else None,
               "wall_time": self.wall_time, "certificate": self.certificate, "detail": self.detail}
        if self.reason is not None:
            out["reason"] = self.reason
        return out


@dataclass
class Report:
    scenario: str
    parameters: dict
    claims: list = field(default_factory=list)
    version: str = __version__
    config: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        stats = {c.status for c in self.claims}
        if FAILED in stats:
            return FAILED
        if INCONCLUSIVE in stats:
            return INCONCLUSIVE
        return VERIFIED

    def exit_code(self) -> int:
        return {VERIFIED: 0, INCONCLUSIVE: 2, FAILED: 1}[self.status]

    def claim(self, name: str) -> Claim:
        for c in self.claims:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict:
        return {"scenario": self.scenario, "parameters": self.parameters,
                "claims": [c.to_json() for c in self.claims], "version": self.version, "config": self.config}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1, ensure_ascii=False) + "\n"


class ClaimRunner:
    """Runs claims in order; a claim whose prerequisites did not verify inherits their outcome."""

    def __init__(self, report: Report, timings: bool = False):
        self.report = report
        self.timings = timings
        self.state: dict = {}

    def run(self, name: str, anchor: str, fn: Callable[[Evidence], dict | None], requires=(),
            status_on_success: str = VERIFIED) -> bool:
        for req in requires:
            c = self.report.claim(req)
            if c.status not in (VERIFIED, MODULO_CITATION):
                st = INCONCLUSIVE if c.status == INCONCLUSIVE else FAILED
                self.report.claims.append(Claim(name, anchor, st, reason=f"requires {req!r} ({c.status})"))
                return False
        ev = Evidence()
        t0 = time.perf_counter()
        try:
            detail = fn(ev) or {}
        except LabError as exc:
            st = classify(exc)
            self.report.claims.append(Claim(name, anchor, st, None, {}, self._time(t0),
                                            f"{type(root_cause(exc)).__name__}: {exc}"))
            return False
        self.report.claims.append(Claim(name, anchor, status_on_success, ev.to_json(), detail, self._time(t0)))
        return True

    def _time(self, t0):
        return round(time.perf_counter() - t0, 3) if self.timings else None


def recheck_report(data: dict) -> list[tuple[str, bool, str]]:
    """Re-expand every verified claim's evidence; returns (claim, ok, message)."""
    out = []
    for c in data["claims"]:
        if c["status"] not in (VERIFIED, MODULO_CITATION):
            continue
        cert = c.get("certificate")
        if cert is None:
            out.append((c["name"], False, "verified claim without certificate"))
            continue
        if digest({"certificate": cert, "detail": c.get("detail", {})}) != c.get("digest"):
            out.append((c["name"], False, "digest mismatch"))
            continue
        try:
            n = recheck_evidence(cert)
        except (RecheckFailure, LabError) as exc:
            out.append((c["name"], False, str(exc)))
            continue
        out.append((c["name"], True, f"{n} entries re-expanded"))
    return out
