from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("stlmon._kernels._fast", ["src/stlmon/_kernels/_fast.pyx"],
                   extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # pure-Python fallback is selected at import time
    ext_modules = []

setup(ext_modules=ext_modules)
