"""Scenario execution, run reports and unified/separate model comparison."""

from __future__ import annotations

import json
import operator
from dataclasses import dataclass, field
from typing import Optional

from . import dsl
from .errors import AccessViolation, ConfigError, LockedError, RangeError
from .fabric import Anm, Platform, ResourceChecker, checker_configure, end_to_end_access
from .hart import ExtensionSet, HartContext, csr_read, csr_write
from .spmp import Stage, VmImage, make_entry, utilization, vm_switch, write_entry

_OPS = {"==": operator.eq, "!=": operator.ne, "<": operator.lt, "<=": operator.le,
        ">": operator.gt, ">=": operator.ge}


@dataclass
class StepResult:
    index: int
    line: int
    statement: str
    passed: bool
    observed: str
    expected: str = ""

    def as_dict(self):
        return {"index": self.index, "line": self.line, "statement": self.statement,
                "status": "pass" if self.passed else "fail",
                "observed": self.observed, "expected": self.expected}


@dataclass
class RunReport:
    steps: list = field(default_factory=list)
    counters: dict = field(default_factory=dict)
    variant: str = ""
    run: object = field(default=None, repr=False, compare=False)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.steps)

    @property
    def failures(self) -> list:
        return [s for s in self.steps if not s.passed]

    def to_dict(self):
        return {"passed": self.passed,
                "steps": [s.as_dict() for s in self.steps],
                "counters": dict(sorted(self.counters.items())),
                "summary": {"steps": len(self.steps), "failed": len(self.failures),
                            "variant": self.variant}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        out = []
        if self.variant:
            out.append(f"variant: {self.variant}")
        for s in self.steps:
            status = "PASS" if s.passed else "FAIL"
            line = f"step {s.index:3d} line {s.line:3d} {status}  {s.statement}"
            if not s.passed:
                line += f"  [observed {s.observed}; expected {s.expected}]"
            out.append(line)
        out.append("counters:")
        for k, v in sorted(self.counters.items()):
            out.append(f"  {k} = {v}")
        n = len(self.steps)
        out.append(f"result: {'PASS' if self.passed else 'FAIL'} "
                   f"({n - len(self.failures)}/{n} steps passed)")
        return "\n".join(out) + "\n"


def build_platform(decl: dsl.PlatformDecl, model_override: Optional[int] = None):
    """Instantiate harts, ANMs and checkers from a platform declaration.

    ``model_override`` picks which of a hart's declared SPMP models to use
    (index into ``HartDecl.models``; clamped to the last one declared).
    """
    harts = []
    for i, h in enumerate(decl.harts):
        k = 0 if model_override is None else min(model_override, len(h.models) - 1)
        model, split = h.models[k]
        harts.append(HartContext(i, h.mwid, ExtensionSet.from_names(h.ext), decl.nworlds,
                                 spmp_model=model, spmp_split=split,
                                 spmp_entries=h.entries, pmp_entries=h.pmp, name=h.name))
    anms = [Anm(a.name, a.wid) for a in decl.anms]
    checkers = [ResourceChecker(r.name, r.base, r.size, r.kind, r.slots) for r in decl.resources]
    return Platform(decl.nworlds, harts, anms, checkers)


def _entry(e: dsl.EntrySpec):
    return make_entry(e.mode, e.base, e.size, e.perms, e.s, e.lock)


def _vm_image(v: dsl.VmDecl) -> VmImage:
    return VmImage(v.name, frozenset(v.wids), v.hslwid, v.hswitch,
                   {e.index: _entry(e) for e in v.entries}, v.prestaged)


class ScenarioRun:
    """Mutable execution state for one run of a program."""

    def __init__(self, program: dsl.ScenarioProgram, model_override=None):
        self.program = program
        self.platform = build_platform(program.platform, model_override)
        self.vms = {v.name: _vm_image(v) for v in program.platform.vms}
        self.denials = {s.value: 0 for s in Stage}
        self.last_switch = {}
        self.verdicts = []  # (step index, statement, verdict) for access steps

    def counters(self) -> dict:
        c = {}
        total = 0
        for name, h in self.platform.harts.items():
            c[f"csr_writes.{name}"] = h.csr_writes
            c[f"entry_writes.{name}"] = h.entry_writes
            total += h.entry_writes
            if h.hspmp is not None or h.hgpmp is not None:
                for k, v in utilization(h).items():
                    c[f"util.{name}.{k}"] = v
        for name, stats in self.last_switch.items():
            c[f"vmswitch.{name}.csr_writes"] = stats.csr_writes
            c[f"vmswitch.{name}.entry_writes"] = stats.entry_writes
        c["entry_writes"] = total
        for stage, n in self.denials.items():
            c[f"denials.{stage}"] = n
        return c

    def step(self, index, s):
        """Execute one statement; returns (passed, observed, expected)."""
        plat = self.platform
        if isinstance(s, dsl.ModeStmt):
            try:
                plat.harts[s.hart].set_mode(s.mode)
            except ConfigError as e:
                return False, f"error: {e}", f"mode {s.mode}"
            return True, f"mode {s.mode}", f"mode {s.mode}"

        if isinstance(s, dsl.CsrwStmt):
            try:
                observed = csr_write(plat.harts[s.hart], s.csr, s.value).value
            except AccessViolation as e:
                observed = f"violation({e.reason})"
            if s.expect is None:
                return not observed.startswith("violation"), observed, "no trap"
            return observed.split("(")[0] == s.expect, observed, s.expect

        if isinstance(s, dsl.CsrrStmt):
            expected = str(s.expect) if isinstance(s.expect, str) else hex(s.expect)
            try:
                value = csr_read(plat.harts[s.hart], s.csr)
            except AccessViolation as e:
                return s.expect == "violation", f"violation({e.reason})", expected
            return value == s.expect, hex(value), expected

        if isinstance(s, dsl.SpmpStmt):
            try:
                ok = write_entry(plat.harts[s.hart], s.entry.index, _entry(s.entry))
                observed = "accepted" if ok else "ignored"
            except AccessViolation as e:
                observed = f"violation({e.reason})"
            if s.expect is None:
                return not observed.startswith("violation"), observed, "no trap"
            return observed.split("(")[0] == s.expect, observed, s.expect

        if isinstance(s, dsl.AccessStmt):
            who = plat.anms[s.initiator] if s.anm else plat.harts[s.initiator]
            v = end_to_end_access(plat, who, s.addr, s.size, s.kind)
            if not v.allow:
                self.denials[v.deny_stage.value] += 1
            self.verdicts.append((index, s, v))
            expected = "allow" if s.allow else ("deny" + (f":{s.stage}" if s.stage else ""))
            if s.allow:
                ok = v.allow
            else:
                ok = not v.allow and (s.stage is None or v.deny_stage.value == s.stage)
            return ok, str(v), expected

        if isinstance(s, dsl.VmSwitchStmt):
            hart = plat.harts[s.hart]
            try:
                stats = vm_switch(hart, self.vms[s.vm])
                self.last_switch[s.hart] = stats
                observed = f"ok(csr_writes={stats.csr_writes}, entry_writes={stats.entry_writes})"
            except ConfigError as e:
                observed = f"config_error({e})"
            except AccessViolation as e:
                observed = f"violation({e.reason})"
            outcome = observed.split("(")[0]
            if s.expect is None:
                return outcome == "ok", observed, "ok"
            return outcome == s.expect, observed, s.expect

        if isinstance(s, dsl.CheckerStmt):
            checker = plat.checker(s.resource)
            rng = s.range if s.range is not None else (0, checker.size)
            try:
                checker_configure(checker, s.slot, rng, {s.wid: s.perms}, s.lock, merge=True)
                observed = "ok"
            except LockedError:
                observed = "locked"
            except RangeError:
                observed = "range_error"
            expected = s.expect or "ok"
            return observed == expected, observed, expected

        if isinstance(s, dsl.StatStmt):
            counters = self.counters()
            if s.counter not in counters:
                return False, "no such counter", f"{s.op} {s.value}"
            value = counters[s.counter]
            return _OPS[s.op](value, s.value), str(value), f"{s.op} {s.value}"

        raise TypeError(f"unknown statement {s!r}")


def run_scenario(program: dsl.ScenarioProgram, model_override=None) -> RunReport:
    """Execute every step in order and compare against its expectation."""
    run = ScenarioRun(program, model_override)
    report = RunReport()
    for i, s in enumerate(program.steps, 1):
        passed, observed, expected = run.step(i, s)
        line = s.pos["stmt"][0] if s.pos else 0
        report.steps.append(StepResult(i, line, dsl.format_statement(s), passed,
                                       observed, expected))
    report.counters = run.counters()
    report.run = run
    return report


# -- model comparison ----------------------------------------------------------------

@dataclass
class Comparison:
    unified: RunReport
    separate: RunReport
    divergences: list  # (step index, statement, unified verdict, separate verdict)
    utilization: dict  # hart -> {"unified": {...}, "separate": {...}}

    def to_text(self) -> str:
        out = [f"divergences: {len(self.divergences)}"]
        for idx, stmt, u, s in self.divergences:
            out.append(f"  step {idx}: {stmt}  unified={u} separate={s}")
        out.append("utilization (used/available):")
        for hart, per in sorted(self.utilization.items()):
            for model in ("unified", "separate"):
                u = per[model]
                out.append(f"  {hart} {model:8s} hs {u['hs_used']}/{u['hs_avail']}  "
                           f"guest {u['guest_used']}/{u['guest_avail']}")
            sep = per["separate"]
            if sep["hs_used"] < sep["hs_avail"] and sep["guest_used"] >= sep["guest_avail"]:
                out.append(f"  {hart}: separate model leaves "
                           f"{sep['hs_avail'] - sep['hs_used']} baseline entries unused "
                           "while hgPMP is exhausted")
        return "\n".join(out) + "\n"


def variant_harts(program: dsl.ScenarioProgram) -> list:
    """Harts declaring both a unified and a separate SPMP model."""
    out = []
    for h in program.platform.harts:
        kinds = [m for m, _ in h.models]
        if "unified" in kinds and "separate" in kinds:
            out.append(h)
    return out


def compare_models(program: dsl.ScenarioProgram) -> Comparison:
    harts = variant_harts(program)
    if not harts:
        raise ConfigError("scenario declares no hart with both unified and separate models")
    # reorder every variant hart so index 0 is unified and 1 is separate
    fixed = []
    for h in program.platform.harts:
        if h in harts:
            uni = next(m for m in h.models if m[0] == "unified")
            sep = next(m for m in h.models if m[0] == "separate")
            h = dsl.HartDecl(h.name, h.mwid, h.ext, (uni, sep), h.entries, h.pmp, h.pos)
        fixed.append(h)
    p = program.platform
    platform = dsl.PlatformDecl(p.nworlds, tuple(fixed), p.anms, p.resources, p.vms, p.pos)
    prog = dsl.ScenarioProgram(platform, program.steps, program.lines)

    uni = run_scenario(prog, model_override=0)
    uni.variant = "unified"
    sep = run_scenario(prog, model_override=1)
    sep.variant = "separate"
    divergences = []
    for (i, s, vu), (_, _, vs) in zip(uni.run.verdicts, sep.run.verdicts):
        if vu.allow != vs.allow:
            divergences.append((i, dsl.format_statement(s), str(vu), str(vs)))
    util = {}
    for h in harts:
        util[h.name] = {"unified": utilization(uni.run.platform.harts[h.name]),
                        "separate": utilization(sep.run.platform.harts[h.name])}
    return Comparison(uni, sep, divergences, util)
