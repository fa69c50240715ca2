"""Per-hart privilege state and the WorldGuard CSR file.

The CSR file covers the baseline WorldGuard registers (``mlwid``,
``mwiddeleg``, ``slwid``), the hypervisor-aware set (``hslwid``,
``hwiddeleg``, ``vslwid``) and the ``h``/``h2``/``h3`` windows that widen
the delegation vectors to 128 WIDs.  The SPMP switch registers are routed
through the same read/write path so that scenario scripts and cost
accounting see a single CSR interface.

Registers are addressed by name.  Delegation vectors are stored raw; bits
at or above ``nworlds`` are dropped only when the vector is used.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields

from .errors import AccessViolation, ConfigError, InitiatorFault
from .spmp import SpmpUnit, UnitKind

WORD_MASK = 0xFFFF_FFFF
MAX_WORLDS = 128
BASE_MAX_WORLDS = 32
DELEG_WINDOWS = ("", "h", "h2", "h3")


class PrivilegeMode(enum.Enum):
    M = "M"
    HS = "HS"  # plain S when the hypervisor extension is absent
    U = "U"
    VS = "VS"
    VU = "VU"

    @property
    def virtualized(self) -> bool:
        return self in (PrivilegeMode.VS, PrivilegeMode.VU)


class DelegLevel(enum.Enum):
    SUPERVISOR = "supervisor"
    VIRTUAL_SUPERVISOR = "virtual_supervisor"


class WriteOutcome(enum.Enum):
    ACCEPTED = "accepted"
    IGNORED_ILLEGAL_VALUE = "ignored"
    ACCESS_VIOLATION = "violation"


# Short names used in scenario files and on the command line.
EXTENSION_ALIASES = {
    "s": "supervisor",
    "h": "hypervisor",
    "smwg": "smwg",
    "smwgd": "smwgd",
    "sswg": "sswg",
    "shwgd": "shwgd",
    "slwgd": "slwgd",
    "spmp": "spmp",
    "spmph": "spmp_hypervisor",
}
_EXT_SHORT = {v: k for k, v in EXTENSION_ALIASES.items()}


@dataclass(frozen=True)
class ExtensionSet:
    supervisor: bool = False
    hypervisor: bool = False
    smwg: bool = False
    smwgd: bool = False
    sswg: bool = False
    shwgd: bool = False
    slwgd: bool = False
    spmp: bool = False
    spmp_hypervisor: bool = False

    def __post_init__(self):
        rules = [
            (self.hypervisor, self.supervisor, "hypervisor requires supervisor mode"),
            (self.smwgd, self.smwg, "smwgd requires smwg"),
            (self.sswg, self.smwgd, "sswg requires smwgd"),
            (self.sswg, self.supervisor, "sswg requires supervisor mode"),
            (self.shwgd, self.sswg and self.hypervisor, "shwgd requires sswg and hypervisor"),
            (self.slwgd, self.smwgd, "slwgd requires smwgd"),
            (self.spmp, self.supervisor, "spmp requires supervisor mode"),
            (self.spmp_hypervisor, self.spmp and self.hypervisor,
             "spmp_hypervisor requires spmp and hypervisor"),
            (self.hypervisor and self.spmp, self.spmp_hypervisor,
             "spmp with hypervisor requires spmp_hypervisor"),
        ]
        for has, needs, msg in rules:
            if has and not needs:
                raise ConfigError(msg)

    @classmethod
    def from_names(cls, names) -> "ExtensionSet":
        flags = {}
        for name in names:
            key = EXTENSION_ALIASES.get(name.lower())
            if key is None:
                raise ConfigError(f"unknown extension {name!r}")
            flags[key] = True
        return cls(**flags)

    @classmethod
    def full(cls) -> "ExtensionSet":
        return cls(**{f.name: True for f in fields(cls)})

    def names(self) -> list[str]:
        return [_EXT_SHORT[f.name] for f in fields(self) if getattr(self, f.name)]


def check_nworlds(nworlds: int, extensions) -> None:
    """Reject WID counts the hart's extensions cannot express."""
    if nworlds < 1:
        raise ConfigError("nworlds must be at least 1")
    if nworlds > MAX_WORLDS:
        raise ConfigError(f"nworlds={nworlds} exceeds the {MAX_WORLDS}-WID maximum")
    if nworlds > BASE_MAX_WORLDS and not extensions.slwgd:
        raise ConfigError(f"nworlds={nworlds} > {BASE_MAX_WORLDS} requires slwgd")


def bits_to_set(bits: int) -> frozenset[int]:
    out = []
    i = 0
    while bits:
        if bits & 1:
            out.append(i)
        bits >>= 1
        i += 1
    return frozenset(out)


def set_to_bits(wids) -> int:
    bits = 0
    for w in wids:
        bits |= 1 << w
    return bits


@dataclass
class WidCsrFile:
    nworlds: int
    mwid: int
    mlwid: int = 0
    slwid: int = 0
    hslwid: int = 0
    vslwid: int = 0
    mwiddeleg: list[int] = field(default_factory=lambda: [0, 0, 0, 0])
    hwiddeleg: list[int] = field(default_factory=lambda: [0, 0, 0, 0])

    def __post_init__(self):
        if not 0 <= self.mwid < self.nworlds:
            raise ConfigError(f"mwid={self.mwid} outside [0, {self.nworlds})")
        if not 0 <= self.mlwid < self.nworlds:
            raise ConfigError(f"mlwid={self.mlwid} outside [0, {self.nworlds})")

    @property
    def world_mask(self) -> int:
        return (1 << self.nworlds) - 1

    @staticmethod
    def join(windows) -> int:
        return sum((w & WORD_MASK) << (32 * i) for i, w in enumerate(windows))


class HartContext:
    """One hart: privilege mode, extensions, WID CSRs and SPMP units."""

    def __init__(self, hart_id=0, mwid=0, extensions=None, nworlds=32,
                 spmp_model="unified", spmp_split=None, spmp_entries=16,
                 pmp_entries=16, vspmp_entries=None, name=None):
        self.hart_id = hart_id
        self.name = name if name is not None else f"hart{hart_id}"
        self.extensions = extensions if extensions is not None else ExtensionSet()
        check_nworlds(nworlds, self.extensions)
        self.nworlds = nworlds
        self.wid_csrs = WidCsrFile(nworlds=nworlds, mwid=mwid, mlwid=mwid)
        self.mode = PrivilegeMode.M
        self.spmp_model = spmp_model
        self.spmp_entries = spmp_entries
        self.spmp_split = spmp_split
        self.csr_writes = 0
        self.entry_writes = 0

        for n in (spmp_entries, pmp_entries):
            if not 0 <= n <= 64:
                raise ConfigError(f"entry count {n} outside [0, 64]")
        if vspmp_entries is None:
            vspmp_entries = spmp_entries

        ext = self.extensions
        self.mpmp = SpmpUnit(UnitKind.MPMP, pmp_entries)
        self.hspmp = None      # unified second stage, also checks HS/U
        self.baseline = None   # HS/U SPMP (separate model or no hypervisor)
        self.hgpmp = None      # separate second stage
        self.vspmp = None
        if ext.spmp and ext.spmp_hypervisor:
            if spmp_model == "unified":
                self.hspmp = SpmpUnit(UnitKind.HSPMP_UNIFIED, spmp_entries)
            elif spmp_model == "separate":
                if spmp_split is None or not 0 <= spmp_split <= spmp_entries:
                    raise ConfigError(f"separate model needs split in [0, {spmp_entries}]")
                self.baseline = SpmpUnit(UnitKind.HSPMP_BASELINE, spmp_split)
                self.hgpmp = SpmpUnit(UnitKind.HGPMP, spmp_entries - spmp_split,
                                      base_index=spmp_split)
            else:
                raise ConfigError(f"unknown spmp model {spmp_model!r}")
            self.vspmp = SpmpUnit(UnitKind.VSPMP, vspmp_entries)
        elif ext.spmp:
            self.baseline = SpmpUnit(UnitKind.HSPMP_BASELINE, spmp_entries)

    def __repr__(self):
        return f"HartContext({self.name!r}, mode={self.mode.value})"

    @property
    def spmp_units(self) -> list[SpmpUnit]:
        return [u for u in (self.mpmp, self.hspmp, self.baseline, self.hgpmp, self.vspmp)
                if u is not None]

    def set_mode(self, mode) -> None:
        mode = PrivilegeMode(mode)
        ext = self.extensions
        if mode is PrivilegeMode.HS and not ext.supervisor:
            raise ConfigError(f"{self.name} has no supervisor mode")
        if mode.virtualized and not ext.hypervisor:
            raise ConfigError(f"{self.name} has no hypervisor extension")
        self.mode = mode

    @property
    def virt(self) -> int:
        return int(self.mode.virtualized)

    def hs_entry_slot(self, index):
        """Map a hypervisor-visible entry index to (unit, local index)."""
        if self.hspmp is not None:
            units = [self.hspmp]
        else:
            units = [u for u in (self.baseline, self.hgpmp) if u is not None]
        for u in units:
            if u.base_index <= index < u.base_index + len(u.entries):
                return u, index - u.base_index
        raise AccessViolation("CsrAbsent", f"spmp entry {index}")


def effective_deleg(hart: HartContext, level) -> frozenset[int]:
    """Delegated WID set for a level, masked to the platform's WIDs.

    The virtual-supervisor set is the intersection of ``hwiddeleg`` with
    ``mwiddeleg``, so it can never exceed what M-mode granted.
    """
    level = DelegLevel(level)
    csrs = hart.wid_csrs
    bits = csrs.join(csrs.mwiddeleg) & csrs.world_mask
    if level is DelegLevel.VIRTUAL_SUPERVISOR:
        bits &= csrs.join(csrs.hwiddeleg)
    return bits_to_set(bits)


def resolve_wid(hart: HartContext) -> int:
    """WID attached to an access issued by ``hart`` in its current mode.

    Raises InitiatorFault when the selected lower-level WID is no longer
    covered by the delegation vector that governs it.
    """
    ext = hart.extensions
    csrs = hart.wid_csrs
    mode = hart.mode
    if mode is PrivilegeMode.M or not ext.smwg:
        return csrs.mwid
    if mode is PrivilegeMode.HS:
        return csrs.mlwid

    if mode.virtualized and ext.shwgd:
        if mode is PrivilegeMode.VS:
            name, wid, level = "hslwid", csrs.hslwid, DelegLevel.SUPERVISOR
        else:
            name, wid, level = "vslwid", csrs.vslwid, DelegLevel.VIRTUAL_SUPERVISOR
    elif ext.sswg:
        # U, or VS/VU on a hart without the hypervisor WID registers
        name, wid, level = "slwid", csrs.slwid, DelegLevel.SUPERVISOR
    else:
        return csrs.mlwid

    if wid not in effective_deleg(hart, level):
        raise InitiatorFault("WidUnresolved", name, wid)
    return wid


# -- CSR access -------------------------------------------------------------

def _split_window(csr):
    for base in ("mwiddeleg", "hwiddeleg", "vspmpswitch", "hspmpswitch", "spmpswitch"):
        if csr.startswith(base):
            suffix = csr[len(base):]
            if base.endswith("deleg") and suffix in DELEG_WINDOWS:
                return base, DELEG_WINDOWS.index(suffix)
            if base.endswith("switch") and suffix in ("", "h"):
                return base, ("", "h").index(suffix)
    return csr, None


def _require(cond, reason, csr):
    if not cond:
        raise AccessViolation(reason, csr)


def _route(hart: HartContext, csr: str):
    """Resolve an architectural CSR name to (register, window) after privilege
    and presence checks.  Raises AccessViolation."""
    ext = hart.extensions
    mode = hart.mode
    base, window = _split_window(csr)
    machine = mode is PrivilegeMode.M
    hyp = mode is PrivilegeMode.HS  # V=0 supervisor
    if mode in (PrivilegeMode.U, PrivilegeMode.VU):
        if base in _KNOWN:
            raise AccessViolation("Privilege", csr)
        raise AccessViolation("UnknownCsr", csr)

    if base == "mwid":
        _require(machine, "Privilege", csr)
        return "mwid", None
    if base == "mlwid":
        _require(ext.smwg, "CsrAbsent", csr)
        _require(machine, "Privilege", csr)
        return "mlwid", None
    if base in ("mwiddeleg", "hwiddeleg"):
        present = ext.smwgd if base == "mwiddeleg" else ext.shwgd
        _require(present, "CsrAbsent", csr)
        _require(window == 0 or ext.slwgd, "CsrAbsent", csr)
        if base == "mwiddeleg":
            _require(machine, "Privilege", csr)
        else:
            _require(machine or hyp, "Privilege", csr)
        return base, window
    if base == "slwid":
        if mode is PrivilegeMode.VS:
            # the guest reaches vslwid through the slwid address
            _require(ext.shwgd, "Privilege", csr)
            return "vslwid", None
        _require(ext.sswg, "CsrAbsent", csr)
        return "slwid", None
    if base in ("hslwid", "vslwid"):
        _require(ext.shwgd, "CsrAbsent", csr)
        _require(machine or hyp, "Privilege", csr)
        return base, None

    if base == "spmpswitch":
        if mode is PrivilegeMode.VS:
            _require(hart.vspmp is not None, "Privilege", csr)
            _require(window == 0 or len(hart.vspmp.entries) > 32, "CsrAbsent", csr)
            return "vspmpswitch", window
        _require(hart.hspmp is not None or hart.baseline is not None, "CsrAbsent", csr)
        _require(window == 0 or hart.spmp_entries > 32, "CsrAbsent", csr)
        return "spmpswitch", window
    if base == "hspmpswitch":
        _require(ext.spmp_hypervisor, "CsrAbsent", csr)
        _require(window == 0 or hart.spmp_entries > 32, "CsrAbsent", csr)
        _require(machine or hyp, "Privilege", csr)
        return "hspmpswitch", window
    if base == "vspmpswitch":
        _require(hart.vspmp is not None, "CsrAbsent", csr)
        _require(window == 0 or len(hart.vspmp.entries) > 32, "CsrAbsent", csr)
        _require(machine or hyp, "Privilege", csr)
        return "vspmpswitch", window
    raise AccessViolation("UnknownCsr", csr)


_KNOWN = {"mwid", "mlwid", "mwiddeleg", "hwiddeleg", "slwid", "hslwid", "vslwid",
          "spmpswitch", "hspmpswitch", "vspmpswitch"}

CSR_NAMES = (
    ["mwid", "mlwid", "slwid", "hslwid", "vslwid"]
    + [f"mwiddeleg{w}" for w in DELEG_WINDOWS]
    + [f"hwiddeleg{w}" for w in DELEG_WINDOWS]
    + ["spmpswitch", "spmpswitchh", "hspmpswitch", "hspmpswitchh",
       "vspmpswitch", "vspmpswitchh"]
)


def _switch_target(hart, reg):
    """(unit, attribute) holding a switch register's bits."""
    if reg == "vspmpswitch":
        return hart.vspmp, "switch_mask"
    if reg == "spmpswitch":
        return (hart.hspmp or hart.baseline), "switch_mask"
    if hart.hspmp is not None:
        return hart.hspmp, "hswitch_mask"
    return hart.hgpmp, "switch_mask"


def _switch_legal(hart, reg):
    # bits for entries the register actually governs
    if reg == "spmpswitch" and hart.hspmp is None:
        unit = hart.baseline
    elif reg == "hspmpswitch" and hart.hspmp is None:
        unit = hart.hgpmp
    else:
        unit, _ = _switch_target(hart, reg)
    return ((1 << len(unit.entries)) - 1) << unit.base_index


def csr_read(hart: HartContext, csr: str) -> int:
    reg, window = _route(hart, csr)
    csrs = hart.wid_csrs
    if reg in ("mwiddeleg", "hwiddeleg"):
        return getattr(csrs, reg)[window]
    if reg.endswith("switch"):
        unit, attr = _switch_target(hart, reg)
        bits = getattr(unit, attr) & _switch_legal(hart, reg)
        return (bits >> (32 * window)) & WORD_MASK
    return getattr(csrs, reg)


def csr_write(hart: HartContext, csr: str, value: int) -> WriteOutcome:
    """Write a CSR from the hart's current mode.

    Returns ACCEPTED or IGNORED_ILLEGAL_VALUE; raises AccessViolation when
    the mode may not touch the register.  An lwid-type write whose value is
    not delegated keeps the old value; writing back the value already held
    counts as accepted.
    """
    reg, window = _route(hart, csr)
    csrs = hart.wid_csrs
    value &= WORD_MASK
    if reg == "mwid":
        raise AccessViolation("ReadOnly", csr)
    hart.csr_writes += 1

    if reg in ("mwiddeleg", "hwiddeleg"):
        getattr(csrs, reg)[window] = value
        return WriteOutcome.ACCEPTED
    if reg.endswith("switch"):
        unit, attr = _switch_target(hart, reg)
        shift = 32 * window
        old = getattr(unit, attr)
        new = (old & ~(WORD_MASK << shift)) | (value << shift)
        setattr(unit, attr, new & _switch_legal(hart, reg))
        return WriteOutcome.ACCEPTED

    if reg == "mlwid":
        legal = value < csrs.nworlds
    elif reg == "vslwid":
        legal = value in effective_deleg(hart, DelegLevel.VIRTUAL_SUPERVISOR)
    else:  # slwid, hslwid
        legal = value in effective_deleg(hart, DelegLevel.SUPERVISOR)
    if legal:
        setattr(csrs, reg, value)
        return WriteOutcome.ACCEPTED
    if getattr(csrs, reg) == value:
        return WriteOutcome.ACCEPTED
    return WriteOutcome.IGNORED_ILLEGAL_VALUE
