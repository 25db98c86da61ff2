"""Build the optional compiled simplex kernels.

The extension is a speedup, not a requirement: if compilation fails (no
compiler, no NumPy headers) the install proceeds and the package falls back
to the NumPy kernels at import time.  The generated C file is committed so
Cython itself is not needed to build; set STOCHUC_CYTHONIZE=1 to regenerate
it from the .pyx source.
"""

import os
import warnings
from pathlib import Path

from setuptools import setup
from setuptools.command.build_ext import build_ext
from setuptools.errors import CCompilerError, ExecError, PlatformError

PYX = "src/stochuc/_kernels/_simplex_ext.pyx"
C_FILE = "src/stochuc/_kernels/_simplex_ext.c"


def make_extensions():
    import numpy as np
    from setuptools import Extension

    if os.environ.get("STOCHUC_CYTHONIZE") or not Path(C_FILE).exists():
        from Cython.Build import cythonize

        return cythonize(
            [Extension("stochuc._kernels._simplex_ext", [PYX],
                       include_dirs=[np.get_include()])],
            compiler_directives={"language_level": "3"},
        )
    return [Extension("stochuc._kernels._simplex_ext", [C_FILE],
                      include_dirs=[np.get_include()],
                      define_macros=[("NPY_NO_DEPRECATED_API",
                                      "NPY_1_7_API_VERSION")])]


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except (CCompilerError, ExecError, PlatformError, OSError) as exc:
            warnings.warn(f"compiled kernels skipped ({exc}); "
                          "using the NumPy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except (CCompilerError, ExecError, PlatformError, OSError) as exc:
            warnings.warn(f"compiled kernels skipped ({exc}); "
                          "using the NumPy fallback")


setup(ext_modules=make_extensions(), cmdclass={"build_ext": OptionalBuildExt})
