"""Build script. The Cython extension is optional: if compilation is not
possible the package installs anyway and falls back to the numpy backend."""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("MFBM_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/mfbm/_backend/_fastcore.pyx"],
            language_level=3,
        )
    except Exception as exc:  # missing Cython or no compiler
        print(f"skipping compiled backend ({exc!r}); numpy fallback will be used")

setup(ext_modules=ext_modules)
