"""Exception types shared across the simulator."""


class WgsimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(WgsimError):
    """Inconsistent platform, hart, VM or budget configuration."""


class AccessViolation(WgsimError):
    """A CSR or SPMP-entry access trapped.

    ``reason`` is one of ``"Privilege"``, ``"CsrAbsent"``, ``"ReadOnly"``,
    ``"UnknownCsr"`` or ``"Locked"``.
    """

    def __init__(self, reason, csr=None):
        self.reason = reason
        self.csr = csr
        msg = reason if csr is None else f"{reason} ({csr})"
        super().__init__(msg)


class InitiatorFault(WgsimError):
    """The initiator could not attach a valid WID to an access."""

    def __init__(self, reason="WidUnresolved", csr=None, wid=None):
        self.reason = reason
        self.csr = csr
        self.wid = wid
        super().__init__(f"{reason}: {csr}={wid}")


class LockedError(WgsimError):
    """Reconfiguration of a locked resource checker."""


class RangeError(WgsimError):
    """Checker slot range outside the resource, or a range on a peripheral."""


class ParseError(WgsimError):
    """Scenario text could not be parsed; positions are 1-based."""

    def __init__(self, line, column, message):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"{line}:{column}: {message}")
