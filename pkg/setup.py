import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

ext_module = Extension(
    "linkalign._kernel._cjoin",
    ["src/linkalign/_kernel/_cjoin.pyx"],
    language="c++",
    include_dirs=[np.get_include()],
)

setup(ext_modules=cythonize(ext_module, language_level="3"))
