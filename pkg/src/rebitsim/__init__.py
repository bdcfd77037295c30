"""Rebit simulation of complex quantum circuits.

An n-qubit complex state is carried by n + 1 real amplitudes ("rebits"), and
real-linear operators ``A + B K`` (``K`` = complex conjugation) become real
orthogonal matrices. The package covers the encoding, a gate alphabet with
its rebit images, dense and stabilizer simulation, orthogonal compiling,
real Clifford hierarchy tests and rebit tomography.
"""

__version__ = "0.1.0"

from ._backend import get_backend, set_backend
from .circuit import Circuit, parse_circuit, run_logical, run_physical
from .codec import decode_operator, decode_state, encode_operator, encode_state
from .gates import Gate, g
from .rlinear import RLinearOp, dagger, is_partial_antiunitary, is_r_unitary, star

__all__ = [
    "__version__",
    "Circuit",
    "Gate",
    "RLinearOp",
    "dagger",
    "decode_operator",
    "decode_state",
    "encode_operator",
    "encode_state",
    "g",
    "get_backend",
    "is_partial_antiunitary",
    "is_r_unitary",
    "parse_circuit",
    "run_logical",
    "run_physical",
    "set_backend",
    "star",
]
