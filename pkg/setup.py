import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("KOSR_SKIP_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "kosr._kernels",
                    ["src/kosr/_kernels.pyx"],
                    language="c++",
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
