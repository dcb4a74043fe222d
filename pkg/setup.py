import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

# -ffp-contract=off keeps the kernel's float ops bit-identical to the pure-Python
# fallback (no FMA contraction); determinism across backends is a tested contract.
ext = Extension(
    "amganneal.annealing._kernel",
    sources=["src/amganneal/annealing/_kernel.pyx"],
    include_dirs=[numpy.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    extra_compile_args=["-O3", "-ffp-contract=off"],
)

setup(ext_modules=cythonize([ext], language_level=3))
