import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None and os.path.exists("src/dagledger/_kernel_cy.pyx"):
    ext_modules = cythonize(
        [
            Extension(
                "dagledger._kernel_cy",
                ["src/dagledger/_kernel_cy.pyx"],
                # no -ffast-math: score comparisons must be IEEE-identical
                # with the pure-Python backend
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
else:
    ext_modules = []  # pure-Python fallback still works

setup(ext_modules=ext_modules)
