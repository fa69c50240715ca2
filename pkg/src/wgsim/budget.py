"""WID budget estimation for MCU configurations.

Counting rules, applied per configuration:

* one WID per non-CPU initiator (ANM);
* one WID per physical hart for its M-level software;
* one WID per non-virtualized hart and privilege level (S, U);
* one WID per virtual hart and virtualized level (HS once, then VS and VU
  per VM);
* one extra WID for each small auxiliary core that needs it.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field, fields

from .errors import ConfigError

PROFILES = ("MU", "MSU", "MHSVSVU")
THRESHOLDS = (32, 64, 128)


@dataclass(frozen=True)
class HartSpec:
    priv_profile: str
    vms: int = 0
    small_core_extra: bool = False

    def __post_init__(self):
        if self.priv_profile not in PROFILES:
            raise ConfigError(f"unknown privilege profile {self.priv_profile!r}")
        if self.vms < 0:
            raise ConfigError("vms must be non-negative")
        if self.vms and self.priv_profile != "MHSVSVU":
            raise ConfigError(f"{self.priv_profile} harts cannot host VMs")


@dataclass(frozen=True)
class BudgetConfig:
    harts: tuple
    anms: int = 0
    label: str = ""
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "harts", tuple(self.harts))
        if self.anms < 0:
            raise ConfigError("anms must be non-negative")


@dataclass(frozen=True)
class BudgetBreakdown:
    anm_ids: int = 0
    m_ids: int = 0
    s_ids: int = 0
    u_ids: int = 0
    hs_ids: int = 0
    vs_ids: int = 0
    vu_ids: int = 0
    extra_small_core_ids: int = 0

    @property
    def total(self) -> int:
        return sum(getattr(self, f.name) for f in fields(self))

    def __add__(self, other):
        return BudgetBreakdown(*(getattr(self, f.name) + getattr(other, f.name)
                                 for f in fields(self)))

    @property
    def thresholds_exceeded(self) -> tuple:
        return tuple(t for t in THRESHOLDS if self.total > t)


def hart_ids(hart: HartSpec) -> BudgetBreakdown:
    counts = dict(m_ids=1)
    if hart.priv_profile == "MU":
        counts["u_ids"] = 1
    elif hart.priv_profile == "MSU":
        counts.update(s_ids=1, u_ids=1)
    else:
        counts.update(hs_ids=1, vs_ids=hart.vms, vu_ids=hart.vms)
    if hart.small_core_extra:
        counts["extra_small_core_ids"] = 1
    return BudgetBreakdown(**counts)


def estimate_wids(config: BudgetConfig) -> BudgetBreakdown:
    if not config.harts and not config.anms:
        raise ConfigError("empty configuration")
    total = BudgetBreakdown(anm_ids=config.anms)
    for h in config.harts:
        total = total + hart_ids(h)
    return total


def _harts(n, profile, **kw):
    return [HartSpec(profile, **kw) for _ in range(n)]


def _high(virt_harts, vms, anms, label):
    main = _harts(virt_harts, "MHSVSVU", vms=vms) + _harts(6 - virt_harts, "MSU")
    aux = [HartSpec("MU"), HartSpec("MSU")]
    return BudgetConfig(main + aux, anms, label)


MEDIUM_NOTE = "rule-derived 42; published value 43 (+1 small-core allowance)"

TABLE2 = (
    BudgetConfig(_harts(2, "MU", small_core_extra=True), 10, "small"),
    BudgetConfig([HartSpec("MSU", small_core_extra=True)] + _harts(3, "MSU"), 30,
                 "medium", MEDIUM_NOTE),
    _high(3, 2, 50, "high"),
)

# Rule-pure medium: the four M+S+U harts without the allowance.
MEDIUM_RULE_PURE = BudgetConfig(_harts(4, "MSU"), 30, "medium (rules only)")

FIG2 = (
    BudgetConfig(_harts(2, "MU"), 2, "S,low"),
    BudgetConfig(_harts(2, "MU", small_core_extra=True), 10, "S,typical"),
    BudgetConfig([HartSpec("MSU", small_core_extra=True)] + _harts(3, "MSU"), 30,
                 "M,typical", MEDIUM_NOTE),
    _high(0, 0, 50, "H,typical,VF0"),
    _high(3, 2, 50, "H,typical,VF2"),
    _high(5, 4, 50, "H,typical,VF4"),
    _high(3, 2, 20, "H,low,VF2"),
)

PRESETS = {"table2": TABLE2, "fig2": FIG2}


@dataclass
class SweepRow:
    label: str
    total: int
    breakdown: BudgetBreakdown
    note: str = ""
    flags: tuple = field(default=())


def sweep(configs) -> list[SweepRow]:
    configs = list(configs)
    if not configs:
        raise ConfigError("sweep needs at least one configuration")
    rows = []
    for c in configs:
        b = estimate_wids(c)
        rows.append(SweepRow(c.label, b.total, b, c.note, b.thresholds_exceeded))
    return rows


CSV_HEADER = ["label", "total", "anm", "m", "s", "u", "hs", "vs", "vu", "extra"]


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        b = r.breakdown
        w.writerow([r.label, r.total, b.anm_ids, b.m_ids, b.s_ids, b.u_ids,
                    b.hs_ids, b.vs_ids, b.vu_ids, b.extra_small_core_ids])
    return buf.getvalue()


def rows_to_table(rows) -> str:
    head = ["config", "WIDs", "anm", "m", "s", "u", "hs", "vs", "vu", "extra", "over"]
    body = []
    for r in rows:
        b = r.breakdown
        over = ",".join(f">{t}" for t in r.flags)
        body.append([r.label, r.total, b.anm_ids, b.m_ids, b.s_ids, b.u_ids, b.hs_ids,
                     b.vs_ids, b.vu_ids, b.extra_small_core_ids, over])
    widths = [max(len(str(x)) for x in col) for col in zip(head, *body)]
    lines = ["  ".join(str(x).ljust(w) for x, w in zip(head, widths)).rstrip()]
    for row, r in zip(body, rows):
        line = "  ".join(str(x).ljust(w) for x, w in zip(row, widths)).rstrip()
        if r.note:
            line += f"  # {r.note}"
        lines.append(line)
    return "\n".join(lines) + "\n"


_HART_LINE = re.compile(r"^(MU|MSU|MHSVSVU)(?:\s+x(\d+))?((?:\s+\S+)*)$")


def parse_config(text: str) -> BudgetConfig:
    """Parse a key-value configuration block.

    ::

        label = medium
        anms = 30
        hart = MSU x3
        hart = MSU extra
        hart = MHSVSVU x2 vms=4
    """
    harts, anms, label = [], 0, ""
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "label":
            label = value
        elif key == "anms":
            try:
                anms = int(value, 0)
            except ValueError:
                raise ConfigError(f"line {lineno}: bad ANM count {value!r}") from None
        elif key == "hart":
            m = _HART_LINE.match(value)
            if not m:
                raise ConfigError(f"line {lineno}: bad hart spec {value!r}")
            count = int(m.group(2) or 1)
            vms, extra = 0, False
            for opt in m.group(3).split():
                if opt == "extra":
                    extra = True
                elif opt.startswith("vms="):
                    vms = int(opt[4:])
                else:
                    raise ConfigError(f"line {lineno}: unknown hart option {opt!r}")
            harts += _harts(count, m.group(1), vms=vms, small_core_extra=extra)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    config = BudgetConfig(harts, anms, label)
    if not config.harts and not config.anms:
        raise ConfigError("empty configuration")
    return config
