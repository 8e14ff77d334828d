"""Simulator for a three-party quantum entity authentication protocol.

The package has three layers: a small state-vector simulator (:mod:`qsim`),
the protocol phases and attack hooks built on top of it (:mod:`protocol`,
:mod:`adversary`), and brute-force analysis utilities plus a command-line
harness (:mod:`oracle`, :mod:`cli`).
"""

__version__ = "0.1.0"

from .qsim import Basis, BellLabel, PauliLabel, StateVector

__all__ = [
    "__version__",
    "Basis",
    "BellLabel",
    "PauliLabel",
    "StateVector",
]
