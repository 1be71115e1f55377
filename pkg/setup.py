"""Build script: compiles the optional matching speedup extension.

The package is fully functional without the extension; the pure-Python
kernel in negfact.matching is selected automatically when the compiled
module is absent (or when NEGFACT_PURE_KERNEL=1).
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("NEGFACT_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/negfact/matching/_speedups.pyx"],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
