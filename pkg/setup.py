from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # No Cython at build time: install the pure-Python fallback only.
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "chaindiff._ckernels",
                ["src/chaindiff/_ckernels.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
