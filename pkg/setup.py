import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("YOYOGAIT_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "yoyogait._kernels",
                    ["src/yoyogait/_kernels.pyx"],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                    libraries=["m"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )

setup(ext_modules=ext_modules)
