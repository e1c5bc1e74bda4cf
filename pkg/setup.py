"""Build hook that compiles the simulation kernel.

The kernel lives in src/omutex/_kernel.py, written in Cython "pure
Python" mode so the same file runs uncompiled.  At build time it is
copied to _kernel_c.py and cythonized; omutex.kernel picks the compiled
twin at import when available.  Compilation failures are non-fatal: the
package then runs on the pure-Python kernel.
"""

import shutil
from pathlib import Path

from setuptools import Extension, setup

HERE = Path(__file__).parent
SRC = HERE / "src" / "omutex" / "_kernel.py"
TWIN = HERE / "src" / "omutex" / "_kernel_c.py"


def _extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    shutil.copyfile(SRC, TWIN)
    ext = Extension("omutex._kernel_c",
                    [str(TWIN.relative_to(HERE))])
    try:
        return cythonize(
            [ext],
            language_level=3,
            compiler_directives={
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except Exception:
        return []


setup(ext_modules=_extensions())
