"""Execution-bounded chemical reaction networks: compile, analyze, verify, simulate."""

from .crn import (Configuration, Crc, Crd, Crn, NotApplicable, Reaction, apply, displacement,
                  global_output, is_terminal, stoichiometric_matrix)

__all__ = [
    "Configuration", "Crc", "Crd", "Crn", "NotApplicable", "Reaction", "apply", "displacement",
    "global_output", "is_terminal", "stoichiometric_matrix",
]
