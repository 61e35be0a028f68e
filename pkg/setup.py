from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "thermal_cbf._kernels._core",
                ["src/thermal_cbf/_kernels/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
else:
    # Pure-python kernels are selected at import time when the extension
    # is absent, so a Cython-less install still works.
    ext_modules = []

setup(ext_modules=ext_modules)
