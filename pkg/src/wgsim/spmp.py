"""PMP-style entry matching and the CPU-side protection stages.

One ``SpmpUnit`` class serves every instance kind: the M-mode PMP, the
hypervisor SPMP (unified, or split into baseline SPMP + hgPMP), and the
guest-controlled vSPMP.  Entry indices in switch masks are *global*: in the
separate model the hgPMP owns indices ``[split, N)`` and its switch mask uses
those same bit positions, so one script can drive either model.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .errors import AccessViolation, ConfigError


class AddrMode(enum.Enum):
    OFF = "off"
    TOR = "tor"
    NA4 = "na4"
    NAPOT = "napot"


class AccessKind(enum.Enum):
    READ = "r"
    WRITE = "w"
    EXECUTE = "x"


class ModeClass(enum.Enum):
    SLIKE = "S"
    ULIKE = "U"
    MACHINE = "M"


class UnitKind(enum.Enum):
    MPMP = "mpmp"
    HSPMP_UNIFIED = "hspmp"
    HSPMP_BASELINE = "spmp"
    HGPMP = "hgpmp"
    VSPMP = "vspmp"


class Stage(enum.Enum):
    VSPMP = "vspmp"
    HSPMP = "hspmp"
    HGPMP = "hgpmp"
    MPMP = "mpmp"
    CHECKER = "checker"
    INITIATOR = "initiator"


STAGE_OF_UNIT = {
    UnitKind.MPMP: Stage.MPMP,
    UnitKind.HSPMP_UNIFIED: Stage.HSPMP,
    UnitKind.HSPMP_BASELINE: Stage.HSPMP,
    UnitKind.HGPMP: Stage.HGPMP,
    UnitKind.VSPMP: Stage.VSPMP,
}


@dataclass(frozen=True)
class SpmpEntry:
    addr_field: int = 0
    addr_mode: AddrMode = AddrMode.OFF
    r: bool = False
    w: bool = False
    x: bool = False
    s_bit: bool = False
    lock: bool = False

    def grants(self, kind: AccessKind) -> bool:
        return {AccessKind.READ: self.r, AccessKind.WRITE: self.w,
                AccessKind.EXECUTE: self.x}[kind]

    @property
    def perms(self) -> str:
        return "".join(c for c, on in zip("rwx", (self.r, self.w, self.x)) if on) or "-"


OFF_ENTRY = SpmpEntry()


def napot_encode(base: int, size: int) -> int:
    """Address field for a naturally aligned power-of-two region (size >= 8)."""
    if size < 8 or size & (size - 1) or base % size:
        raise ConfigError(f"bad NAPOT region base={base:#x} size={size:#x}")
    return (base >> 2) | ((size >> 3) - 1)


def napot_decode(addr_field: int) -> tuple[int, int]:
    ones = 0
    while (addr_field >> ones) & 1:
        ones += 1
    size = 1 << (ones + 3)
    base = (addr_field & ~((1 << ones) - 1)) << 2
    return base, size


def make_entry(mode, base=0, size=0, perms="", s_bit=False, lock=False) -> SpmpEntry:
    """Build an entry from a byte-level region description.

    NAPOT/NA4 take ``base`` and ``size``; TOR takes its exclusive top address
    in ``base`` (the bottom comes from the previous entry).
    """
    mode = AddrMode(mode)
    if mode is AddrMode.NAPOT:
        addr = napot_encode(base, size)
    elif mode is AddrMode.NA4:
        if base % 4:
            raise ConfigError(f"NA4 base {base:#x} not 4-byte aligned")
        addr = base >> 2
    elif mode is AddrMode.TOR:
        if base % 4:
            raise ConfigError(f"TOR top {base:#x} not 4-byte aligned")
        addr = base >> 2
    else:
        addr = base >> 2
    return SpmpEntry(addr, mode, "r" in perms, "w" in perms, "x" in perms, s_bit, lock)


def entry_region(entries, i) -> Optional[tuple[int, int]]:
    """Byte range [lo, hi) covered by ``entries[i]``, or None when OFF."""
    e = entries[i]
    if e.addr_mode is AddrMode.OFF:
        return None
    if e.addr_mode is AddrMode.NA4:
        lo = e.addr_field << 2
        return lo, lo + 4
    if e.addr_mode is AddrMode.NAPOT:
        base, size = napot_decode(e.addr_field)
        return base, base + size
    lo = entries[i - 1].addr_field << 2 if i > 0 else 0
    return lo, e.addr_field << 2


@dataclass
class SpmpUnit:
    kind: UnitKind
    size: int = 16
    base_index: int = 0
    entries: list = field(default=None)
    switch_mask: int = -1
    hswitch_mask: int = 0

    def __post_init__(self):
        if self.entries is None:
            self.entries = [OFF_ENTRY] * self.size
        if self.switch_mask == -1:
            # PMP has no switch register; SPMP switch bits reset to zero
            self.switch_mask = self.all_bits if self.kind is UnitKind.MPMP else 0

    @property
    def all_bits(self) -> int:
        return ((1 << len(self.entries)) - 1) << self.base_index

    def region(self, local_index):
        return entry_region(self.entries, local_index)


@dataclass(frozen=True)
class AccessRequest:
    addr: int
    size: int
    kind: AccessKind
    mode_class: ModeClass

    def __post_init__(self):
        if self.size not in (1, 2, 4, 8):
            raise ConfigError(f"access size {self.size} not in 1/2/4/8")
        if self.addr < 0:
            raise ConfigError("negative address")


@dataclass(frozen=True)
class CheckVerdict:
    allow: bool
    deny_stage: Optional[Stage] = None
    matched_entry: Optional[int] = None
    wid: Optional[int] = None

    def __post_init__(self):
        if self.allow != (self.deny_stage is None):
            raise ValueError("deny_stage must be set exactly when the access is denied")

    def __str__(self):
        return "allow" if self.allow else f"deny:{self.deny_stage.value}"


ALLOW = CheckVerdict(True)


def spmp_check(unit: SpmpUnit, req: AccessRequest, active_mask: Optional[int] = None
               ) -> CheckVerdict:
    """Check one access against one unit.

    The lowest-indexed enabled entry whose region holds the whole access
    decides.  In SPMP-type units S-like requests only see entries with the
    S bit set and U-like requests only see the others.
    """
    if active_mask is None:
        active_mask = unit.switch_mask
    stage = STAGE_OF_UNIT[unit.kind]
    is_pmp = unit.kind is UnitKind.MPMP
    lo_req, hi_req = req.addr, req.addr + req.size

    for j, e in enumerate(unit.entries):
        g = unit.base_index + j
        if not (active_mask >> g) & 1:
            continue
        region = entry_region(unit.entries, j)
        if region is None or not (region[0] <= lo_req and hi_req <= region[1]):
            continue
        if req.mode_class is ModeClass.MACHINE:
            if is_pmp and e.lock and not e.grants(req.kind):
                return CheckVerdict(False, stage, g)
            return CheckVerdict(True, matched_entry=g)
        if not is_pmp and e.s_bit != (req.mode_class is ModeClass.SLIKE):
            continue
        if e.grants(req.kind):
            return CheckVerdict(True, matched_entry=g)
        return CheckVerdict(False, stage, g)

    if req.mode_class is ModeClass.MACHINE:
        return ALLOW
    if is_pmp and not unit.entries:
        return ALLOW  # no PMP implemented
    return CheckVerdict(False, stage)


def two_stage_check(hart, addr: int, size: int, kind) -> CheckVerdict:
    """Run the CPU-side protection pipeline for an access by ``hart``.

    Stages run in order vSPMP, hypervisor SPMP (or hgPMP), M-PMP; the first
    denial is returned.
    """
    from .hart import PrivilegeMode

    kind = AccessKind(kind)
    mode = hart.mode
    stages = []
    if mode is PrivilegeMode.M:
        stages.append((hart.mpmp, ModeClass.MACHINE, None))
    else:
        if mode.virtualized:
            if hart.vspmp is not None:
                cls = ModeClass.SLIKE if mode is PrivilegeMode.VS else ModeClass.ULIKE
                stages.append((hart.vspmp, cls, hart.vspmp.switch_mask))
                if hart.hspmp is not None:
                    stages.append((hart.hspmp, ModeClass.ULIKE, hart.hspmp.hswitch_mask))
                else:
                    stages.append((hart.hgpmp, ModeClass.ULIKE, hart.hgpmp.switch_mask))
        else:
            unit = hart.hspmp or hart.baseline
            if unit is not None:
                cls = ModeClass.SLIKE if mode is PrivilegeMode.HS else ModeClass.ULIKE
                stages.append((unit, cls, unit.switch_mask))
        stages.append((hart.mpmp, ModeClass.ULIKE, None))

    for unit, cls, mask in stages:
        v = spmp_check(unit, AccessRequest(addr, size, kind, cls), mask)
        if not v.allow:
            return v
    return ALLOW


def write_entry(hart, index: int, entry: SpmpEntry) -> bool:
    """Program one entry from the hart's current mode.

    M-mode writes the M-PMP, HS-mode the hypervisor array (global index),
    VS-mode the guest's vSPMP.  Costs two entry writes (address + cfg).
    Returns False when a locked M-PMP entry ignored the write.
    """
    from .hart import PrivilegeMode

    mode = hart.mode
    if mode is PrivilegeMode.M:
        unit, j = hart.mpmp, index
    elif mode is PrivilegeMode.HS:
        if hart.hspmp is None and hart.baseline is None:
            raise AccessViolation("CsrAbsent", f"spmp entry {index}")
        unit, j = hart.hs_entry_slot(index)
    elif mode is PrivilegeMode.VS:
        if hart.vspmp is None:
            raise AccessViolation("Privilege", f"spmp entry {index}")
        unit, j = hart.vspmp, index
    else:
        raise AccessViolation("Privilege", f"spmp entry {index}")
    if not 0 <= j < len(unit.entries):
        raise AccessViolation("CsrAbsent", f"spmp entry {index}")
    if unit.kind is not UnitKind.MPMP:
        entry = SpmpEntry(entry.addr_field, entry.addr_mode, entry.r, entry.w,
                          entry.x, entry.s_bit, False)
    else:
        entry = SpmpEntry(entry.addr_field, entry.addr_mode, entry.r, entry.w,
                          entry.x, False, entry.lock)
    hart.entry_writes += 2
    if unit.entries[j].lock:
        return False
    unit.entries[j] = entry
    return True


# -- VM switching -----------------------------------------------------------

@dataclass
class VmImage:
    name: str
    wids: frozenset
    hslwid: int
    hswitch: int = 0
    entries: dict = field(default_factory=dict)  # global index -> SpmpEntry
    prestaged: bool = True


@dataclass(frozen=True)
class SwitchStats:
    csr_writes: int
    entry_writes: int


def vm_switch(hart, vm: VmImage) -> SwitchStats:
    """Hypervisor-side context restore for ``vm``.

    Writes hslwid, then every hwiddeleg window the platform's WIDs span,
    then (unless pre-staged) the guest's entries, and finally the
    hspmpswitch window(s).
    """
    from .hart import DelegLevel, PrivilegeMode, csr_write, effective_deleg, set_to_bits

    if hart.mode not in (PrivilegeMode.M, PrivilegeMode.HS):
        raise AccessViolation("Privilege", "vmswitch")
    if not hart.extensions.shwgd or not hart.extensions.spmp_hypervisor:
        raise ConfigError(f"{hart.name} lacks shwgd/spmp_hypervisor for VM switching")
    granted = effective_deleg(hart, DelegLevel.SUPERVISOR)
    missing = set(vm.wids) - granted
    if missing:
        raise ConfigError(f"VM {vm.name} uses WIDs {sorted(missing)} not in mwiddeleg")
    if vm.hslwid not in vm.wids:
        raise ConfigError(f"VM {vm.name} hslwid {vm.hslwid} not among its WIDs")

    csr0, ent0 = hart.csr_writes, hart.entry_writes
    csr_write(hart, "hslwid", vm.hslwid)
    deleg = set_to_bits(vm.wids)
    n_deleg = (hart.nworlds + 31) // 32
    for w, suffix in enumerate(("", "h", "h2", "h3")[:n_deleg]):
        csr_write(hart, "hwiddeleg" + suffix, (deleg >> (32 * w)) & 0xFFFF_FFFF)
    if not vm.prestaged:
        for index in sorted(vm.entries):
            write_entry(hart, index, vm.entries[index])
    n_switch = (hart.spmp_entries + 31) // 32 or 1
    for w, suffix in enumerate(("", "h")[:n_switch]):
        csr_write(hart, "hspmpswitch" + suffix, (vm.hswitch >> (32 * w)) & 0xFFFF_FFFF)
    return SwitchStats(hart.csr_writes - csr0, hart.entry_writes - ent0)


def utilization(hart) -> dict:
    """Configured-and-enabled entries per side of the hypervisor SPMP.

    ``hs`` counts entries serving HS/U accesses, ``guest`` those serving
    VS/VU accesses.  In the unified model both sides draw from one pool, so
    each side's ``avail`` is the full entry count.
    """
    def used(unit, mask):
        return sum(1 for j, e in enumerate(unit.entries)
                   if e.addr_mode is not AddrMode.OFF and (mask >> (unit.base_index + j)) & 1)

    if hart.hspmp is not None:
        u = hart.hspmp
        n = len(u.entries)
        return {"hs_used": used(u, u.switch_mask), "hs_avail": n,
                "guest_used": used(u, u.hswitch_mask), "guest_avail": n}
    out = {"hs_used": 0, "hs_avail": 0, "guest_used": 0, "guest_avail": 0}
    if hart.baseline is not None:
        b = hart.baseline
        out["hs_used"], out["hs_avail"] = used(b, b.switch_mask), len(b.entries)
    if hart.hgpmp is not None:
        g = hart.hgpmp
        out["guest_used"], out["guest_avail"] = used(g, g.switch_mask), len(g.entries)
    return out
