"""Build the optional compiled core; the package falls back to pure Python without it."""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("WLFORGE_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "wlforge._core",
                    ["src/wlforge/_core.pyx"],
                    include_dirs=[np.get_include()],
                    # no -ffast-math: the neighbour sums must keep IEEE addition order
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
