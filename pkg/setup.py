"""Build script for the optional compiled kernels.

The package is fully functional without the extension: ifslab.backend falls
back to the numpy implementation in ifslab._kernels_py when the compiled
module is absent.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "ifslab._kernels",
                ["src/ifslab/_kernels.pyx"],
                # -ffp-contract=off keeps the C arithmetic rounding-identical
                # to the numpy fallback (no fused multiply-adds).
                extra_compile_args=["-O3", "-ffp-contract=off"],
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
