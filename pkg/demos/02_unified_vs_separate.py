"""Nine guest regions on a 16-entry hypervisor SPMP.

The hypervisor keeps two regions for itself.  With one shared array the
guest's nine regions fit in the remaining fourteen slots.  Splitting the
same sixteen entries 8/8 strands six baseline entries and leaves the guest
one region short.
"""

from wgsim import ExtensionSet, HartContext, csr_write, make_entry, two_stage_check, write_entry
from wgsim.spmp import utilization

ext = ExtensionSet.from_names(["s", "h", "smwg", "smwgd", "sswg", "shwgd", "spmp", "spmph"])
GUEST = [0x8000_4000 + 0x1000 * i for i in range(9)]


def build(model):
    hart = HartContext(0, 0, ext, 8, spmp_model=model,
                       spmp_split=8 if model == "separate" else None, name=model)
    write_entry(hart, 0, make_entry("napot", 0, 1 << 32, "rwx"))  # M-PMP: open
    hart.set_mode("HS")
    write_entry(hart, 0, make_entry("napot", 0x8000_0000, 0x4000, "rwx", s_bit=True))
    write_entry(hart, 1, make_entry("napot", 0x1000_0000, 0x100, "rw", s_bit=True))
    csr_write(hart, "spmpswitch", 0b11)
    for i, base in enumerate(GUEST, start=7):
        write_entry(hart, i, make_entry("napot", base, 0x1000, "rw"))
    csr_write(hart, "hspmpswitch", 0xFF80)
    hart.set_mode("VS")
    write_entry(hart, 0, make_entry("napot", 0x8000_0000, 0x1_0000, "rw", s_bit=True))
    csr_write(hart, "spmpswitch", 1)
    return hart


for model in ("unified", "separate"):
    hart = build(model)
    verdicts = [str(two_stage_check(hart, a, 4, "r")) for a in GUEST]
    u = utilization(hart)
    print(f"{model:>8}: {verdicts.count('allow')}/9 guest regions reachable; "
          f"hs {u['hs_used']}/{u['hs_avail']}, guest {u['guest_used']}/{u['guest_avail']}")
    for a, v in zip(GUEST, verdicts):
        if v != "allow":
            print(f"          {a:#x} -> {v}")
