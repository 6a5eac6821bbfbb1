import os

from setuptools import setup, Extension

PYX = "src/shockhash/_kernels/_core.pyx"

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "shockhash._kernels._core",
                [PYX],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    ) if os.path.exists(PYX) else []
except ImportError:
    # Pure-Python fallback still works without the compiled core.
    ext_modules = []

setup(ext_modules=ext_modules)
