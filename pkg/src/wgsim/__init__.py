"""Transaction-level model of WorldGuard and SPMP isolation on RISC-V MCUs."""

from .budget import BudgetBreakdown, BudgetConfig, HartSpec, estimate_wids, sweep
from .dsl import format_program, parse_scenario
from .errors import (AccessViolation, ConfigError, InitiatorFault, LockedError,
                     ParseError, RangeError)
from .fabric import (Anm, Platform, ResourceChecker, Transaction, checker_configure,
                     end_to_end_access, fabric_route)
from .hart import (DelegLevel, ExtensionSet, HartContext, PrivilegeMode, WriteOutcome,
                   csr_read, csr_write, effective_deleg, resolve_wid)
from .runner import RunReport, compare_models, run_scenario
from .spmp import (AccessKind, AccessRequest, AddrMode, CheckVerdict, ModeClass,
                   SpmpEntry, SpmpUnit, Stage, SwitchStats, UnitKind, VmImage,
                   make_entry, spmp_check, two_stage_check, vm_switch, write_entry)

__version__ = "0.1.0"
