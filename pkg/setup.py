from setuptools import Extension, setup
from Cython.Build import cythonize
import numpy as np

ext = Extension(
    "sightline._kernels._core",
    ["src/sightline/_kernels/_core.pyx"],
    include_dirs=[np.get_include()],
    # -ffp-contract=off: no FMA contraction, results must match the numpy
    # fallback bit-for-bit
    extra_compile_args=["-O3", "-ffp-contract=off"],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

setup(ext_modules=cythonize([ext], language_level="3"))
