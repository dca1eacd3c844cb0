"""Build script for the compiled kernel extension.

The package works without the extension (a pure numpy fallback is selected
at import time); set RADCOMOPT_REQUIRE_EXT=1 to turn a failed extension
build into a hard error instead of a warning.
"""

import os
import sys

from setuptools import Extension, setup


def extensions():
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError as exc:
        if os.environ.get("RADCOMOPT_REQUIRE_EXT"):
            raise
        print(f"skipping compiled kernels ({exc}); pure-python fallback will be used",
              file=sys.stderr)
        return []
    ext = Extension(
        "radcomopt._kernels._core",
        ["src/radcomopt/_kernels/_core.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions())
