"""Build script: compiles the optional hot-loop extension when Cython is present.

The package is fully functional without the extension; cellnas._core falls
back to the pure-Python kernels at import time.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "cellnas._core._nkcore",
                ["src/cellnas/_core/_nkcore.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
