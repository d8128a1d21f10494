"""Pseudospectral laboratory for self-similar non-uniqueness of forced
Navier-Stokes: similarity variables, the linearized operator and its unstable
mode, the random clock, Picard solvers, and paired-solution verification."""

from ._ssnu import *  # noqa: F401,F403
from ._ssnu import __doc__ as _core_doc  # noqa: F401
