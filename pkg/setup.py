import os

from setuptools import setup

# The compiled edit-distance kernel is an optional speedup: the package
# falls back to the pure-Python implementation when the extension is
# absent.  SURPDEC_NO_EXT=1 skips the build entirely.
ext_modules = []
if not os.environ.get("SURPDEC_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "surpdec._editdist",
                    ["src/surpdec/_editdist.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
