"""Backend selection for the simulation core.

Prefers the compiled twin (omutex._kernel_c, built by setup.py from the
same source file) and falls back to the pure-Python module.  Set
OMUTEX_PURE_PYTHON=1 to force the fallback.  BACKEND names the module
in use; COMPILED says whether it is the cythonized build.
"""

import os

if os.environ.get("OMUTEX_PURE_PYTHON", "") not in ("", "0"):
    from omutex import _kernel as _impl
else:
    try:
        from omutex import _kernel_c as _impl  # type: ignore[attr-defined]
    except ImportError:
        from omutex import _kernel as _impl

BACKEND = _impl.__name__
COMPILED = bool(getattr(_impl, "COMPILED", False))

MASK64 = _impl.MASK64
mix64 = _impl.mix64
Stream = _impl.Stream
derive_stream_seed = _impl.derive_stream_seed
eval_rpn = _impl.eval_rpn

RPN_NOT = _impl.RPN_NOT
RPN_AND = _impl.RPN_AND
RPN_OR = _impl.RPN_OR
RPN_TRUE = _impl.RPN_TRUE
RPN_FALSE = _impl.RPN_FALSE

KernelError = _impl.KernelError
StabilityError = _impl.StabilityError
InterferenceError = _impl.InterferenceError
InvariantError = _impl.InvariantError

MODE_UNIFORM = _impl.MODE_UNIFORM
MODE_LOW = _impl.MODE_LOW
MODE_HIGH = _impl.MODE_HIGH
MODE_EXHAUSTIVE = _impl.MODE_EXHAUSTIVE

Sampler = _impl.Sampler
HseEngine = _impl.HseEngine
PrsEngine = _impl.PrsEngine

OP_ASSIGN = _impl.OP_ASSIGN
OP_WAIT = _impl.OP_WAIT
OP_SEL = _impl.OP_SEL
OP_JUMP = _impl.OP_JUMP
OP_FORK = _impl.OP_FORK
OP_JOIN = _impl.OP_JOIN
OP_HALT = _impl.OP_HALT

C_EMIT = _impl.C_EMIT
C_DELAY = _impl.C_DELAY
C_DELAY_UNTIL = _impl.C_DELAY_UNTIL
C_WAIT = _impl.C_WAIT
C_USAGE = _impl.C_USAGE

HZ_INSTABILITY = _impl.HZ_INSTABILITY
HZ_INTERFERENCE = _impl.HZ_INTERFERENCE


def load_backend(pure=False):
    """Return the requested kernel module (used by the benchmark)."""
    if pure:
        from omutex import _kernel
        return _kernel
    try:
        from omutex import _kernel_c  # type: ignore[attr-defined]
        return _kernel_c
    except ImportError:
        return None
