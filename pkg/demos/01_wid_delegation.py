"""Delegating WIDs down the privilege stack, then taking one back.

Firmware hands WIDs 3..6 to the hypervisor, the hypervisor passes 5 and 6
on to its guest, and the guest kernel picks 6 for its user tasks.  When
firmware later withdraws WID 6 the guest's user code can no longer issue
any access at all.
"""

from wgsim import (AccessViolation, ExtensionSet, HartContext, InitiatorFault, csr_read,
                   csr_write, effective_deleg, resolve_wid)

ext = ExtensionSet.from_names(["s", "h", "smwg", "smwgd", "sswg", "shwgd", "spmp", "spmph"])
hart = HartContext(0, mwid=0, extensions=ext, nworlds=8, name="h0")


def show(label):
    hart_mode = hart.mode
    rows = []
    for mode in ("M", "HS", "U", "VS", "VU"):
        hart.set_mode(mode)
        try:
            rows.append(f"{mode}={resolve_wid(hart)}")
        except InitiatorFault:
            rows.append(f"{mode}=fault")
    hart.set_mode(hart_mode)
    print(f"{label:<34} " + "  ".join(rows))


# firmware
csr_write(hart, "mlwid", 2)
csr_write(hart, "mwiddeleg", 0b0111_1000)
print("S-level set :", sorted(effective_deleg(hart, "supervisor")))

# hypervisor
hart.set_mode("HS")
print("slwid 1 (not delegated):", csr_write(hart, "slwid", 1).value)
csr_write(hart, "slwid", 3)
csr_write(hart, "hslwid", 5)
csr_write(hart, "hwiddeleg", 0b0110_0000)
print("VS-level set:", sorted(effective_deleg(hart, "virtual_supervisor")))

# guest kernel: the slwid address now reaches vslwid
hart.set_mode("VS")
csr_write(hart, "slwid", 6)
print("guest reads slwid ->", csr_read(hart, "slwid"))
try:
    csr_write(hart, "hslwid", 6)
except AccessViolation as e:
    print("guest writing hslwid ->", e.reason)

show("WIDs per mode after setup:")

hart.set_mode("M")
csr_write(hart, "mwiddeleg", 0b0011_1000)
show("after firmware drops WID 6:")
