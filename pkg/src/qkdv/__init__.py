"""Exact q-deformed KdV, mKdV and Toda hierarchies on windowed Fourier modes."""

from .coeffs import BACKEND, QRat, X, field, make_field, use_field
from .modering import GeneratorId, Poly, Ring, WindowConfig
from .opalg import PseudoDiffOp, nth_root, op_inverse, op_mul
from .hierarchy_kdv import CheckFailure, KdVState, hamiltonian_res, qkdv_flow
from .miura_mkdv import MKdVState
from .toda import TodaContext

__version__ = "0.1.0"
