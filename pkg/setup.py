"""Build script: compiles the optional Cython kernel extension.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); set KERRPO_NO_EXTENSION=1 to skip compilation on
machines without a C toolchain.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("KERRPO_NO_EXTENSION") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "kerrpo.backends._kernels",
                    ["src/kerrpo/backends/_kernels.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
