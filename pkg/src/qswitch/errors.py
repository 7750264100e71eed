"""Exception types shared across the package."""

from __future__ import annotations


class QSwitchError(Exception):
    """Base class for all package-specific errors."""


class LayoutError(QSwitchError):
    """Operator or state used with an incompatible tensor layout."""


class ConfigError(QSwitchError):
    """Network configuration is syntactically or semantically invalid.

    Carries a list of (field_path, message) diagnostics so callers can
    report every problem at once.
    """

    def __init__(self, diagnostics):
        if isinstance(diagnostics, str):
            diagnostics = [("", diagnostics)]
        self.diagnostics = list(diagnostics)
        lines = [f"{path}: {msg}" if path else msg for path, msg in self.diagnostics]
        super().__init__("invalid configuration:\n  " + "\n  ".join(lines))


class ResonanceError(QSwitchError):
    """A detuning required to be nonzero is zero; dispersive formulas invalid."""


class ConvergenceError(QSwitchError):
    """Integration failed its step-halving convergence check."""


class TruncationWarning(UserWarning):
    """A bosonic mode accumulated population in its top Fock level."""


class DispersiveValidityWarning(UserWarning):
    """A detuning-to-coupling ratio fell below the dispersive threshold."""
