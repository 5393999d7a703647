"""Dispatcher for the numeric kernel backend (numba loops vs pure numpy)."""

from . import _accel
from . import _kernels_numpy

if _accel.USE_NUMBA:
    from . import _kernels_numba as _impl
else:
    _impl = _kernels_numpy

ACTIVE_BACKEND = _impl.BACKEND_NAME

g_eval = _impl.g_eval
sgprime_eval = _impl.sgprime_eval
solve_s = _impl.solve_s
conductivity = _impl.conductivity
h_closed = _impl.h_closed
h_quad = _impl.h_quad
thomas_solve = _impl.thomas_solve
cg_solve = _impl.cg_solve
