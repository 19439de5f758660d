"""Build script: compiles the optional Cython kernel extension.

Set LOGSPRING_NO_EXT=1 to skip the extension; the package then runs on the
pure NumPy kernels selected automatically at import time.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("LOGSPRING_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "logspring._kernels_cy",
                    ["src/logspring/_kernels_cy.pyx"],
                )
            ],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
