"""Build script: compiles the optional Cython propagation kernel.

The package works without the extension (a pure-Python fallback with the
identical algorithm is selected at import time), so any failure here is
downgraded to a warning and the build proceeds pure.
"""
import sys

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "fuchsia_heun._dp45_cy",
                ["src/fuchsia_heun/_dp45_cy.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # noqa: BLE001 - degrade to pure python on any build issue
    sys.stderr.write(
        "fuchsia-heun: Cython kernel not built (%s); "
        "installing with the pure-Python propagator only\n" % exc
    )
    ext_modules = []

setup(ext_modules=ext_modules)
