"""Resource-side WID checkers and the transaction path to them.

The model is deliberately small: each resource owns one checker made of
slots, each slot holding an optional address range and a WID -> {r, w}
permission map.  Peripherals get a single whole-resource slot.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError, InitiatorFault, LockedError, RangeError
from .hart import HartContext, check_nworlds, resolve_wid
from .spmp import ALLOW, AccessKind, CheckVerdict, Stage, two_stage_check


class ResourceKind(enum.Enum):
    MEMORY = "memory"
    PERIPHERAL = "peripheral"


@dataclass(frozen=True)
class Anm:
    """Non-CPU initiator (one DMA channel, one accelerator port, ...)."""
    name: str
    wid: int


@dataclass(frozen=True)
class Transaction:
    initiator: str
    wid: int
    addr: int
    size: int
    kind: AccessKind

    def __post_init__(self):
        if self.kind is AccessKind.EXECUTE:
            raise ConfigError("bus transactions are reads or writes")


@dataclass
class Slot:
    range: Optional[tuple[int, int]] = None  # (offset, length) inside the resource
    wid_perms: dict = field(default_factory=dict)  # wid -> "r" / "w" / "rw"


@dataclass
class ResourceChecker:
    resource: str
    base: int
    size: int
    kind: ResourceKind = ResourceKind.MEMORY
    nslots: int = 1
    slots: list = field(default=None)
    locked: bool = False

    def __post_init__(self):
        self.kind = ResourceKind(self.kind)
        if self.size <= 0:
            raise ConfigError(f"resource {self.resource} has no extent")
        if self.slots is None:
            if self.range_capable:
                if self.nslots < 1:
                    raise ConfigError(f"memory {self.resource} needs at least one slot")
                self.slots = [Slot() for _ in range(self.nslots)]
            else:
                self.slots = [Slot(range=(0, self.size))]

    @property
    def range_capable(self) -> bool:
        return self.kind is ResourceKind.MEMORY

    def contains(self, addr, size=1) -> bool:
        return self.base <= addr and addr + size <= self.base + self.size

    def check(self, txn: Transaction) -> CheckVerdict:
        off = txn.addr - self.base
        need = "r" if txn.kind is AccessKind.READ else "w"
        for i, slot in enumerate(self.slots):
            if slot.range is None:
                continue
            lo, n = slot.range
            if lo <= off and off + txn.size <= lo + n:
                if need in slot.wid_perms.get(txn.wid, ""):
                    return CheckVerdict(True, matched_entry=i, wid=txn.wid)
                return CheckVerdict(False, Stage.CHECKER, i, wid=txn.wid)
        return CheckVerdict(False, Stage.CHECKER, wid=txn.wid)


def checker_configure(checker: ResourceChecker, slot: int, range=None, wid_perms=None,
                      lock=False, merge=False) -> None:
    """Set a slot's range and permissions; optionally lock the checker.

    ``range`` is ``(offset, length)`` relative to the resource base, or None
    to keep/cover the whole resource on peripherals.  With ``merge`` the
    permissions are added to the slot's existing map.
    """
    if checker.locked:
        raise LockedError(f"checker {checker.resource} is locked")
    if not 0 <= slot < len(checker.slots):
        raise RangeError(f"slot {slot} outside checker {checker.resource}")
    if range is not None:
        off, n = range
        if not checker.range_capable and (off, n) != (0, checker.size):
            raise RangeError(f"peripheral {checker.resource} is not range-configurable")
        if off < 0 or n <= 0 or off + n > checker.size:
            raise RangeError(f"range ({off:#x}, {n:#x}) outside {checker.resource}")
    target = checker.slots[slot]
    if range is not None:
        target.range = tuple(range)
    if wid_perms is not None:
        perms = dict(target.wid_perms) if merge else {}
        for wid, p in wid_perms.items():
            if set(p) - set("rw"):
                raise ConfigError(f"checker permissions are r/w, got {p!r}")
            perms[wid] = "".join(c for c in "rw" if c in p)
        target.wid_perms = perms
    if lock:
        checker.locked = True


class Platform:
    """Harts, ANMs and resource checkers sharing one WID space."""

    def __init__(self, nworlds, harts=(), anms=(), checkers=()):
        self.nworlds = nworlds
        self.harts = {}
        self.anms = {}
        self.checkers = []
        if nworlds < 1:
            raise ConfigError("nworlds must be at least 1")
        for h in harts:
            self.add_hart(h)
        for a in anms:
            self.add_anm(a)
        for c in checkers:
            self.add_checker(c)
        if not self.harts:
            check_nworlds(nworlds, _NO_EXT)

    def add_hart(self, hart: HartContext):
        check_nworlds(self.nworlds, hart.extensions)
        if hart.nworlds != self.nworlds:
            raise ConfigError(f"{hart.name} built for nworlds={hart.nworlds}")
        if hart.name in self.harts:
            raise ConfigError(f"duplicate hart {hart.name}")
        self.harts[hart.name] = hart

    def add_anm(self, anm: Anm):
        if not 0 <= anm.wid < self.nworlds:
            raise ConfigError(f"ANM {anm.name} wid {anm.wid} outside [0, {self.nworlds})")
        if anm.name in self.anms:
            raise ConfigError(f"duplicate ANM {anm.name}")
        self.anms[anm.name] = anm

    def add_checker(self, checker: ResourceChecker):
        for c in self.checkers:
            if checker.base < c.base + c.size and c.base < checker.base + checker.size:
                raise ConfigError(f"resources {c.resource} and {checker.resource} overlap")
        self.checkers.append(checker)

    def checker(self, name) -> ResourceChecker:
        for c in self.checkers:
            if c.resource == name:
                return c
        raise KeyError(name)


class _NoExt:
    slwgd = False


_NO_EXT = _NoExt()


def fabric_route(txn: Transaction, checkers) -> CheckVerdict:
    """Deliver ``txn`` to the checker of the resource it addresses."""
    for c in checkers:
        if c.contains(txn.addr, txn.size):
            return c.check(txn)
    return CheckVerdict(False, Stage.CHECKER, wid=txn.wid)


def end_to_end_access(platform: Platform, initiator, addr: int, size: int, kind) -> CheckVerdict:
    """Full path for one access from a hart or an ANM.

    Harts go through the CPU-side stages, then WID resolution, then the
    resource checker.  ANMs only meet the checker.
    """
    kind = AccessKind(kind)
    if isinstance(initiator, Anm):
        txn = Transaction(initiator.name, initiator.wid, addr, size, kind)
        return fabric_route(txn, platform.checkers)

    hart = initiator
    v = two_stage_check(hart, addr, size, kind)
    if not v.allow:
        return v
    try:
        wid = resolve_wid(hart)
    except InitiatorFault:
        return CheckVerdict(False, Stage.INITIATOR)
    # instruction fetches appear on the bus as reads
    bus_kind = AccessKind.READ if kind is AccessKind.EXECUTE else kind
    v = fabric_route(Transaction(hart.name, wid, addr, size, bus_kind), platform.checkers)
    return v if not v.allow else CheckVerdict(True, wid=wid)
