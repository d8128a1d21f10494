"""Builds the _ssnu pybind11 extension directly from the C++ core sources
(install with `pip install -e . --no-build-isolation`)."""

import glob

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

sources = sorted(glob.glob("src/*.cpp")) + ["bindings/py_ssnu.cpp"]

ext = Pybind11Extension(
    "ssnu._ssnu",
    sources,
    include_dirs=["include", "vendor", "/usr/include/eigen3"],
    libraries=["fftw3"],
    cxx_std=20,
    extra_compile_args=["-O2"],
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
