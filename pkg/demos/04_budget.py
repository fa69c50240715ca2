"""WID budgets for the reference MCU configurations."""

from wgsim import estimate_wids
from wgsim.budget import FIG2, MEDIUM_RULE_PURE, TABLE2, rows_to_table, sweep

print(rows_to_table(sweep(TABLE2)))
print("without the small-core allowance the medium system needs",
      estimate_wids(MEDIUM_RULE_PURE).total, "IDs\n")
print(rows_to_table(sweep(FIG2)))
