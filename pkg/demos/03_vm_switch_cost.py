"""What a VM switch costs, counted in CSR and entry writes.

A pre-staged guest (entries already sitting in the shared array) needs the
same three CSR writes however large the array is.  Reprogramming the
entries adds two writes per entry.
"""

from wgsim import ExtensionSet, HartContext, VmImage, csr_write, make_entry, vm_switch

ext = ExtensionSet.from_names(["s", "h", "smwg", "smwgd", "sswg", "shwgd", "spmp", "spmph"])

print(f"{'entries':>7} {'staged csr':>10} {'reprog csr':>10} {'reprog entry':>12}")
for n in (4, 8, 16, 32):
    row = []
    for prestaged in (True, False):
        hart = HartContext(0, 0, ext, 32, spmp_entries=n)
        csr_write(hart, "mwiddeleg", 0b110)
        hart.set_mode("HS")
        image = {i: make_entry("napot", 0x1000 * (i + 1), 0x1000, "rw") for i in range(n)}
        stats = vm_switch(hart, VmImage("g", frozenset({1, 2}), 1, (1 << n) - 1, image,
                                        prestaged))
        row.append(stats)
    print(f"{n:>7} {row[0].csr_writes:>10} {row[1].csr_writes:>10} {row[1].entry_writes:>12}")
