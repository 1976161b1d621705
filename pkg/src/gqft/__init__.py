"""Quantum Fourier transform circuits over finite groups.

Typical use::

    from gqft import SymmetricGroup, synthesize, verify_group
    report = verify_group(SymmetricGroup(4))
"""

__version__ = "0.1.0"

from .groups import CyclicGroup, MetacyclicGroup, SymmetricGroup, build_tower, dihedral, group_from_json
from .reps import build_reps
from .synth import synth_qft, synthesize
from .verify import verify_group

__all__ = [
    "CyclicGroup",
    "MetacyclicGroup",
    "SymmetricGroup",
    "build_tower",
    "build_reps",
    "dihedral",
    "group_from_json",
    "synth_qft",
    "synthesize",
    "verify_group",
    "__version__",
]
