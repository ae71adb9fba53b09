"""Optional compiled pivot kernel.

The package is pure Python by default; `python setup.py build_ext --inplace`
(with Cython and a C compiler present) compiles the simplex pivot kernel,
which the solver picks up automatically at import.  FMA contraction is
disabled so compiled and fallback kernels round identically.
"""
from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension(
            "mtlmas.milp._pivot_cy",
            ["src/mtlmas/milp/_pivot_cy.pyx"],
            extra_compile_args=["-O3", "-ffp-contract=off"],
        )],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
