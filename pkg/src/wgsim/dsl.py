"""Scenario language: syntax tree, parser and canonical printer.

A scenario is a ``platform { ... }`` block followed by one statement per
line::

    platform {
      nworlds = 16;
      hart h0 { mwid=0; ext=[s,h,smwg,smwgd,sswg,shwgd,spmp,spmph]; spmp=unified; }
      anm dma0 { wid=9; }
      memory ram { base=0x8000_0000; size=0x1_0000; slots=4; }
      peripheral uart { base=0x1000_0000; size=0x100; }
      vm guest { wids=[5,6]; hslwid=5; hswitch=0xff00; prestaged=yes; }
    }
    checker ram slot 0 range 0 0x1000 wid 3 rw lock
    on h0: mode HS
    on h0: csrw slwid 4 => accepted
    on h0: expect csrr slwid == 4
    on h0: spmp 2 napot 0x8000_0000/0x1000 rwx s
    on h0: access r 0x8000_0100 4 => deny:checker
    on h0: vmswitch guest
    anm dma0: access w 0x8000_0000 => deny:checker
    expect stat csr_writes.h0 == 3

Parsing is total: any input either yields a ``ScenarioProgram`` or raises
``ParseError`` with the 1-based line and column of the offending token.
Name resolution and range checks run after the grammar and report through
the same exception.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import ConfigError, ParseError
from .hart import (BASE_MAX_WORLDS, CSR_NAMES, EXTENSION_ALIASES, MAX_WORLDS,
                   ExtensionSet)
from .spmp import AddrMode, Stage

MODES = ("M", "HS", "U", "VS", "VU")
WRITE_RESULTS = ("accepted", "ignored", "violation")
SWITCH_RESULTS = ("ok", "config_error", "violation")
CHECKER_RESULTS = ("ok", "locked", "range_error")
STAT_OPS = ("==", "!=", "<=", ">=", "<", ">")
STAGES = tuple(s.value for s in Stage)
_EXT_ORDER = list(EXTENSION_ALIASES)


def _pos():
    return field(default=None, compare=False, repr=False)


# -- syntax tree --------------------------------------------------------------

@dataclass(frozen=True)
class HartDecl:
    name: str
    mwid: int = 0
    ext: tuple = ()
    models: tuple = (("unified", None),)
    entries: int = 16
    pmp: int = 16
    pos: dict = _pos()


@dataclass(frozen=True)
class AnmDecl:
    name: str
    wid: int
    pos: dict = _pos()


@dataclass(frozen=True)
class ResourceDecl:
    name: str
    kind: str
    base: int
    size: int
    slots: int = 1
    pos: dict = _pos()


@dataclass(frozen=True)
class EntrySpec:
    index: int
    mode: str
    base: int
    size: int = 0
    perms: str = ""
    s: bool = False
    lock: bool = False


@dataclass(frozen=True)
class VmDecl:
    name: str
    wids: tuple
    hslwid: int
    hswitch: int = 0
    prestaged: bool = True
    entries: tuple = ()
    pos: dict = _pos()


@dataclass(frozen=True)
class PlatformDecl:
    nworlds: int
    harts: tuple = ()
    anms: tuple = ()
    resources: tuple = ()
    vms: tuple = ()
    pos: dict = _pos()


@dataclass(frozen=True)
class ModeStmt:
    hart: str
    mode: str
    pos: dict = _pos()


@dataclass(frozen=True)
class CsrwStmt:
    hart: str
    csr: str
    value: int
    expect: Optional[str] = None
    pos: dict = _pos()


@dataclass(frozen=True)
class CsrrStmt:
    hart: str
    csr: str
    expect: Union[int, str]  # value, or "violation"
    pos: dict = _pos()


@dataclass(frozen=True)
class SpmpStmt:
    hart: str
    entry: EntrySpec
    expect: Optional[str] = None
    pos: dict = _pos()


@dataclass(frozen=True)
class AccessStmt:
    initiator: str
    anm: bool
    kind: str
    addr: int
    size: int
    allow: bool
    stage: Optional[str] = None
    pos: dict = _pos()


@dataclass(frozen=True)
class VmSwitchStmt:
    hart: str
    vm: str
    expect: Optional[str] = None
    pos: dict = _pos()


@dataclass(frozen=True)
class CheckerStmt:
    resource: str
    slot: int
    range: Optional[tuple]  # None means the whole resource
    wid: int
    perms: str
    lock: bool = False
    expect: Optional[str] = None
    pos: dict = _pos()


@dataclass(frozen=True)
class StatStmt:
    counter: str
    op: str
    value: int
    pos: dict = _pos()


@dataclass(frozen=True)
class ScenarioProgram:
    platform: PlatformDecl
    steps: tuple = ()
    lines: tuple = field(default=(), compare=False, repr=False)


# -- tokenizer ------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # word, num, punct, nl, eof
    text: str
    line: int
    col: int
    value: int = 0


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<num>[0-9][0-9A-Za-z_]*)
  | (?P<word>[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<punct>=>|==|!=|<=|>=|[{};=\[\],:/<>\-])
""", re.VERBOSE)


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        col = i - line_start + 1
        if m is None:
            raise ParseError(line, col, f"unexpected character {text[i]!r}")
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            tokens.append(Token("nl", s, line, col))
            line += 1
            line_start = m.end()
        elif kind == "num":
            try:
                value = int(s, 0)
            except ValueError:
                raise ParseError(line, col, f"bad numeric literal {s!r}") from None
            tokens.append(Token("num", s, line, col, value))
        elif kind in ("word", "punct"):
            tokens.append(Token(kind, s, line, col))
        i = m.end()
    tokens.append(Token("eof", "", line, i - line_start + 1))
    return tokens


# -- parser -------------------------------------------------------------------------

class _Parser:
    def __init__(self, text):
        self.lines = text.split("\n")
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, msg, tok=None):
        tok = tok or self.tok
        raise ParseError(tok.line, tok.col, msg)

    def next(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, text) -> bool:
        return self.tok.kind in ("word", "punct") and self.tok.text == text

    def expect(self, text) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.next()

    def word(self, what="name") -> Token:
        if self.tok.kind != "word":
            self.fail(f"expected {what}")
        return self.next()

    def num(self, what="number") -> Token:
        if self.tok.kind != "num":
            self.fail(f"expected {what}")
        return self.next()

    def choice(self, options, what) -> Token:
        if self.tok.kind != "word" or self.tok.text not in options:
            self.fail(f"expected {what} ({'|'.join(options)})")
        return self.next()

    def skip_nl(self):
        while self.tok.kind == "nl":
            self.next()

    def skip_seps(self):
        while self.tok.kind == "nl" or self.at(";"):
            self.next()

    def end_of_statement(self):
        if self.tok.kind not in ("nl", "eof"):
            self.fail(f"unexpected {self.tok.text!r} at end of statement")
        self.next()

    # platform block

    def platform(self) -> PlatformDecl:
        self.skip_nl()
        start = self.tok
        if not self.at("platform"):
            self.fail("scenario must start with a platform block")
        self.next()
        self.skip_nl()
        self.expect("{")
        nworlds = None
        harts, anms, resources, vms = [], [], [], []
        pos = {"platform": (start.line, start.col)}
        while True:
            self.skip_seps()
            if self.at("}"):
                self.next()
                break
            t = self.tok
            if self.at("nworlds"):
                self.next()
                self.expect("=")
                n = self.num("nworlds value")
                nworlds = n.value
                pos["nworlds"] = (n.line, n.col)
            elif self.at("hart"):
                harts.append(self.hart_decl())
            elif self.at("anm"):
                anms.append(self.anm_decl())
            elif self.at("memory") or self.at("peripheral"):
                resources.append(self.resource_decl())
            elif self.at("vm"):
                vms.append(self.vm_decl())
            else:
                self.fail(f"unexpected {t.text or 'end of input'!r} in platform block")
        if nworlds is None:
            self.fail("platform block lacks nworlds", start)
        self.end_of_statement()
        return PlatformDecl(nworlds, tuple(harts), tuple(anms), tuple(resources),
                            tuple(vms), pos)

    def attrs(self, handlers):
        """Parse ``{ key=value; ... }`` dispatching each key to a handler."""
        self.skip_nl()
        self.expect("{")
        while True:
            self.skip_seps()
            if self.at("}"):
                self.next()
                return
            key = self.word("attribute name")
            if key.text not in handlers:
                self.fail(f"unknown attribute {key.text!r}", key)
            handlers[key.text](key)

    def assign_num(self, out, pos, name):
        def handler(key):
            self.expect("=")
            t = self.num(f"{name} value")
            out[name] = t.value
            pos[name] = (t.line, t.col)
        return handler

    def num_list(self):
        self.expect("[")
        items = []
        while not self.at("]"):
            items.append(self.num("list element"))
            if not self.at("]"):
                self.expect(",")
        self.next()
        return items

    def hart_decl(self) -> HartDecl:
        self.next()
        name = self.word("hart name")
        out = {}
        pos = {"name": (name.line, name.col)}

        def ext(key):
            self.expect("=")
            self.expect("[")
            names = []
            while not self.at("]"):
                t = self.word("extension name")
                if t.text not in EXTENSION_ALIASES:
                    self.fail(f"unknown extension {t.text!r}", t)
                names.append(t.text)
                if not self.at("]"):
                    self.expect(",")
            pos["ext"] = (key.line, key.col)
            self.next()
            out["ext"] = tuple(sorted(set(names), key=_EXT_ORDER.index))

        def model_one():
            t = self.choice(("unified", "separate"), "spmp model")
            if t.text == "separate":
                self.expect(":")
                k = self.num("split index")
                return ("separate", k.value)
            return ("unified", None)

        def spmp(key):
            self.expect("=")
            pos["spmp"] = (key.line, key.col)
            if self.at("["):
                self.next()
                models = [model_one()]
                while self.at(","):
                    self.next()
                    models.append(model_one())
                self.expect("]")
            else:
                models = [model_one()]
            out["models"] = tuple(models)

        self.attrs({
            "mwid": self.assign_num(out, pos, "mwid"),
            "ext": ext,
            "spmp": spmp,
            "entries": self.assign_num(out, pos, "entries"),
            "pmp": self.assign_num(out, pos, "pmp"),
        })
        return HartDecl(name.text, pos=pos, **out)

    def anm_decl(self) -> AnmDecl:
        self.next()
        name = self.word("ANM name")
        out = {}
        pos = {"name": (name.line, name.col)}
        self.attrs({"wid": self.assign_num(out, pos, "wid")})
        if "wid" not in out:
            self.fail(f"ANM {name.text} needs a wid", name)
        return AnmDecl(name.text, out["wid"], pos)

    def resource_decl(self) -> ResourceDecl:
        kind = self.next().text
        name = self.word("resource name")
        out = {}
        pos = {"name": (name.line, name.col)}
        handlers = {"base": self.assign_num(out, pos, "base"),
                    "size": self.assign_num(out, pos, "size")}
        if kind == "memory":
            handlers["slots"] = self.assign_num(out, pos, "slots")
        self.attrs(handlers)
        for req in ("base", "size"):
            if req not in out:
                self.fail(f"{kind} {name.text} needs {req}", name)
        return ResourceDecl(name.text, kind, pos=pos, **out)

    def entry_spec(self, index_tok) -> EntrySpec:
        mode_tok = self.choice(tuple(m.value for m in AddrMode), "address mode")
        mode = mode_tok.text
        base_tok = self.num("address")
        base, size = base_tok.value, 0
        if mode == "napot":
            self.expect("/")
            size = self.num("region size").value
        elif mode == "na4":
            size = 4
        perms = self.perms_token("rwx")
        s = lock = False
        while self.tok.kind == "word" and self.tok.text in ("s", "l"):
            flag = self.next().text
            if flag == "s":
                s = True
            else:
                lock = True
        return EntrySpec(index_tok.value, mode, base, size, perms, s, lock)

    def perms_token(self, allowed) -> str:
        if self.at("-"):
            self.next()
            return ""
        t = self.word("permissions")
        if not t.text or set(t.text) - set(allowed) or len(set(t.text)) != len(t.text):
            self.fail(f"bad permissions {t.text!r}", t)
        return "".join(c for c in allowed if c in t.text)

    def vm_decl(self) -> VmDecl:
        self.next()
        name = self.word("VM name")
        out = {"entries": []}
        pos = {"name": (name.line, name.col)}

        def wids(key):
            self.expect("=")
            items = self.num_list()
            pos["wids"] = [(t.line, t.col) for t in items]
            out["wids"] = tuple(sorted({t.value for t in items}))

        def prestaged(key):
            self.expect("=")
            out["prestaged"] = self.choice(("yes", "no"), "yes or no").text == "yes"

        def entry(key):
            idx = self.num("entry index")
            out["entries"].append(self.entry_spec(idx))
            pos.setdefault("entries", []).append((idx.line, idx.col))

        self.attrs({
            "wids": wids,
            "hslwid": self.assign_num(out, pos, "hslwid"),
            "hswitch": self.assign_num(out, pos, "hswitch"),
            "prestaged": prestaged,
            "entry": entry,
        })
        for req in ("wids", "hslwid"):
            if req not in out:
                self.fail(f"vm {name.text} needs {req}", name)
        out["entries"] = tuple(sorted(out["entries"], key=lambda e: e.index))
        return VmDecl(name.text, pos=pos, **out)

    # statements

    def result(self, options):
        if not self.at("=>"):
            return None
        self.next()
        return self.choice(options, "expected outcome").text

    def statement(self):
        t = self.tok
        here = {"stmt": (t.line, t.col)}
        if self.at("on"):
            self.next()
            hart = self.word("hart name")
            here["hart"] = (hart.line, hart.col)
            self.expect(":")
            return self.hart_statement(hart.text, here)
        if self.at("anm"):
            self.next()
            anm = self.word("ANM name")
            here["anm"] = (anm.line, anm.col)
            self.expect(":")
            self.expect("access")
            return self.access(anm.text, True, here)
        if self.at("checker"):
            self.next()
            res = self.word("resource name")
            here["resource"] = (res.line, res.col)
            self.expect("slot")
            slot = self.num("slot index")
            here["slot"] = (slot.line, slot.col)
            self.expect("range")
            if self.at("all"):
                self.next()
                rng = None
            else:
                off = self.num("range offset")
                n = self.num("range length")
                here["range"] = (off.line, off.col)
                rng = (off.value, n.value)
            self.expect("wid")
            wid = self.num("WID")
            here["wid"] = (wid.line, wid.col)
            perms = self.perms_token("rw")
            lock = False
            if self.at("lock"):
                self.next()
                lock = True
            expect = self.result(CHECKER_RESULTS)
            return CheckerStmt(res.text, slot.value, rng, wid.value, perms, lock, expect, here)
        if self.at("expect"):
            self.next()
            self.expect("stat")
            counter = self.word("counter name")
            here["counter"] = (counter.line, counter.col)
            if self.tok.kind != "punct" or self.tok.text not in STAT_OPS:
                self.fail("expected comparison operator")
            op = self.next().text
            value = self.num("counter value")
            return StatStmt(counter.text, op, value.value, here)
        self.fail(f"unknown statement {t.text!r}")

    def hart_statement(self, hart, here):
        verb = self.choice(("mode", "csrw", "expect", "spmp", "access", "vmswitch"),
                           "hart statement")
        if verb.text == "mode":
            m = self.choice(MODES, "privilege mode")
            return ModeStmt(hart, m.text, here)
        if verb.text == "csrw":
            csr = self.csr_name()
            here["csr"] = (csr.line, csr.col)
            value = self.num("CSR value")
            return CsrwStmt(hart, csr.text, value.value, self.result(WRITE_RESULTS), here)
        if verb.text == "expect":
            self.expect("csrr")
            csr = self.csr_name()
            here["csr"] = (csr.line, csr.col)
            self.expect("==")
            if self.at("violation"):
                self.next()
                return CsrrStmt(hart, csr.text, "violation", here)
            return CsrrStmt(hart, csr.text, self.num("expected value").value, here)
        if verb.text == "spmp":
            idx = self.num("entry index")
            entry = self.entry_spec(idx)
            return SpmpStmt(hart, entry, self.result(WRITE_RESULTS), here)
        if verb.text == "access":
            return self.access(hart, False, here)
        vm = self.word("VM name")
        here["vm"] = (vm.line, vm.col)
        return VmSwitchStmt(hart, vm.text, self.result(SWITCH_RESULTS), here)

    def csr_name(self):
        t = self.word("CSR name")
        if t.text not in CSR_NAMES:
            self.fail(f"unknown CSR {t.text!r}", t)
        return t

    def access(self, who, anm, here):
        kind = self.choice(("r", "w") if anm else ("r", "w", "x"), "access kind")
        addr = self.num("address")
        here["addr"] = (addr.line, addr.col)
        size = 4
        if self.tok.kind == "num":
            st = self.next()
            if st.value not in (1, 2, 4, 8):
                self.fail("access size must be 1, 2, 4 or 8", st)
            size = st.value
        self.expect("=>")
        verdict = self.choice(("allow", "deny"), "verdict")
        stage = None
        if verdict.text == "deny" and self.at(":"):
            self.next()
            stage = self.choice(STAGES, "denying stage").text
        return AccessStmt(who, anm, kind.text, addr.value, size, verdict.text == "allow",
                          stage, here)

    def program(self) -> ScenarioProgram:
        platform = self.platform()
        steps = []
        while True:
            self.skip_nl()
            if self.tok.kind == "eof":
                break
            steps.append(self.statement())
            self.end_of_statement()
        return ScenarioProgram(platform, tuple(steps), tuple(self.lines))


def parse_scenario(text: str) -> ScenarioProgram:
    """Parse scenario text; raises ParseError on syntax or name errors."""
    program = _Parser(text).program()
    validate(program)
    return program


# -- semantic checks --------------------------------------------------------------

def _err(pos, key, msg, fallback=(1, 1)):
    pos = pos or {}
    where = pos.get(key) or pos.get("stmt") or pos.get("name") or fallback
    if isinstance(where, list):
        where = where[0]
    raise ParseError(where[0], where[1], msg)


def validate(program: ScenarioProgram) -> None:
    p = program.platform
    ppos = p.pos or {}
    top = ppos.get("platform", (1, 1))
    n = p.nworlds
    if not 1 <= n <= MAX_WORLDS:
        _err(ppos, "nworlds", f"nworlds={n} outside [1, {MAX_WORLDS}]", top)

    harts = {}
    for h in p.harts:
        if h.name in harts:
            _err(h.pos, "name", f"duplicate hart {h.name}")
        harts[h.name] = h
        try:
            ext = ExtensionSet.from_names(h.ext)
        except ConfigError as e:
            _err(h.pos, "ext", str(e))
        if n > BASE_MAX_WORLDS and not ext.slwgd:
            _err(ppos, "nworlds", f"nworlds={n} > {BASE_MAX_WORLDS} but hart {h.name} "
                 "lacks slwgd", top)
        if not 0 <= h.mwid < n:
            _err(h.pos, "mwid", f"mwid {h.mwid} >= nworlds")
        for key in ("entries", "pmp"):
            if not 0 <= getattr(h, key) <= 64:
                _err(h.pos, key, f"{key} must be in [0, 64]")
        for model, split in h.models:
            if model == "separate" and split > h.entries:
                _err(h.pos, "spmp", f"split {split} exceeds {h.entries} entries")
    if not p.harts and n > BASE_MAX_WORLDS:
        _err(ppos, "nworlds", f"nworlds={n} > {BASE_MAX_WORLDS} needs slwgd harts", top)

    anms = {}
    for a in p.anms:
        if a.name in anms:
            _err(a.pos, "name", f"duplicate ANM {a.name}")
        anms[a.name] = a
        if not 0 <= a.wid < n:
            _err(a.pos, "wid", f"ANM wid {a.wid} >= nworlds")

    resources = {}
    for r in p.resources:
        if r.name in resources:
            _err(r.pos, "name", f"duplicate resource {r.name}")
        if r.size <= 0:
            _err(r.pos, "size", f"resource {r.name} has zero size")
        if r.kind == "memory" and r.slots < 1:
            _err(r.pos, "slots", "memory needs at least one slot")
        for o in resources.values():
            if r.base < o.base + o.size and o.base < r.base + r.size:
                _err(r.pos, "base", f"resources {o.name} and {r.name} overlap")
        resources[r.name] = r

    vms = {}
    for v in p.vms:
        if v.name in vms:
            _err(v.pos, "name", f"duplicate vm {v.name}")
        vms[v.name] = v
        for w in v.wids:
            if w >= n:
                _err(v.pos, "wids", f"VM WID {w} >= nworlds")
        if v.hslwid >= n:
            _err(v.pos, "hslwid", f"hslwid {v.hslwid} >= nworlds")
        for e in v.entries:
            _check_entry(e, v.pos, "name")

    for s in program.steps:
        pos = s.pos
        if isinstance(s, (ModeStmt, CsrwStmt, CsrrStmt, SpmpStmt, VmSwitchStmt)):
            if s.hart not in harts:
                _err(pos, "hart", f"undeclared hart {s.hart}")
        if isinstance(s, SpmpStmt):
            _check_entry(s.entry, pos, "stmt")
        elif isinstance(s, VmSwitchStmt) and s.vm not in vms:
            _err(pos, "vm", f"undeclared vm {s.vm}")
        elif isinstance(s, AccessStmt):
            table = anms if s.anm else harts
            if s.initiator not in table:
                _err(pos, "anm" if s.anm else "hart",
                     f"undeclared {'ANM' if s.anm else 'hart'} {s.initiator}")
        elif isinstance(s, CheckerStmt):
            if s.resource not in resources:
                _err(pos, "resource", f"undeclared resource {s.resource}")
            r = resources[s.resource]
            if s.slot >= (r.slots if r.kind == "memory" else 1):
                _err(pos, "slot", f"slot {s.slot} outside {r.name}")
            if s.wid >= n:
                _err(pos, "wid", f"checker WID {s.wid} >= nworlds")


def _check_entry(e: EntrySpec, pos, key):
    if not 0 <= e.index < 64:
        _err(pos, key, f"entry index {e.index} outside [0, 64)")
    if e.mode == "napot":
        if e.size < 8 or e.size & (e.size - 1) or e.base % e.size:
            _err(pos, key, f"bad NAPOT region {e.base:#x}/{e.size:#x}")
    elif e.mode in ("na4", "tor") and e.base % 4:
        _err(pos, key, f"address {e.base:#x} not 4-byte aligned")


# -- printer ----------------------------------------------------------------------

def _n(v: int) -> str:
    return str(v) if v < 16 else hex(v)


def _entry_text(e: EntrySpec) -> str:
    if e.mode == "napot":
        where = f"{_n(e.base)}/{_n(e.size)}"
    else:
        where = _n(e.base)
    flags = "".join(f" {f}" for f, on in (("s", e.s), ("l", e.lock)) if on)
    return f"{_n(e.index)} {e.mode} {where} {e.perms or '-'}{flags}"


def _result(r):
    return f" => {r}" if r is not None else ""


def format_statement(s) -> str:
    if isinstance(s, ModeStmt):
        return f"on {s.hart}: mode {s.mode}"
    if isinstance(s, CsrwStmt):
        return f"on {s.hart}: csrw {s.csr} {_n(s.value)}{_result(s.expect)}"
    if isinstance(s, CsrrStmt):
        exp = s.expect if isinstance(s.expect, str) else _n(s.expect)
        return f"on {s.hart}: expect csrr {s.csr} == {exp}"
    if isinstance(s, SpmpStmt):
        return f"on {s.hart}: spmp {_entry_text(s.entry)}{_result(s.expect)}"
    if isinstance(s, AccessStmt):
        who = f"anm {s.initiator}" if s.anm else f"on {s.initiator}"
        verdict = "allow" if s.allow else "deny" + (f":{s.stage}" if s.stage else "")
        return f"{who}: access {s.kind} {_n(s.addr)} {s.size} => {verdict}"
    if isinstance(s, VmSwitchStmt):
        return f"on {s.hart}: vmswitch {s.vm}{_result(s.expect)}"
    if isinstance(s, CheckerStmt):
        rng = "all" if s.range is None else f"{_n(s.range[0])} {_n(s.range[1])}"
        lock = " lock" if s.lock else ""
        return (f"checker {s.resource} slot {s.slot} range {rng} wid {s.wid} "
                f"{s.perms or '-'}{lock}{_result(s.expect)}")
    if isinstance(s, StatStmt):
        return f"expect stat {s.counter} {s.op} {s.value}"
    raise TypeError(f"not a statement: {s!r}")


def _model_text(models):
    parts = [m if split is None else f"{m}:{split}" for m, split in models]
    return parts[0] if len(parts) == 1 else "[" + ", ".join(parts) + "]"


def format_platform(p: PlatformDecl) -> str:
    out = ["platform {", f"  nworlds = {p.nworlds};"]
    for h in p.harts:
        out.append(f"  hart {h.name} {{ mwid={h.mwid}; ext=[{','.join(h.ext)}]; "
                   f"spmp={_model_text(h.models)}; entries={h.entries}; pmp={h.pmp}; }}")
    for a in p.anms:
        out.append(f"  anm {a.name} {{ wid={a.wid}; }}")
    for r in p.resources:
        slots = f" slots={r.slots};" if r.kind == "memory" else ""
        out.append(f"  {r.kind} {r.name} {{ base={_n(r.base)}; size={_n(r.size)};{slots} }}")
    for v in p.vms:
        head = (f"  vm {v.name} {{ wids=[{','.join(map(str, v.wids))}]; hslwid={v.hslwid}; "
                f"hswitch={_n(v.hswitch)}; prestaged={'yes' if v.prestaged else 'no'};")
        if not v.entries:
            out.append(head + " }")
            continue
        out.append(head)
        for e in v.entries:
            out.append(f"    entry {_entry_text(e)};")
        out.append("  }")
    out.append("}")
    return "\n".join(out)


def format_program(program: ScenarioProgram) -> str:
    lines = [format_platform(program.platform)]
    lines += [format_statement(s) for s in program.steps]
    return "\n".join(lines) + "\n"
