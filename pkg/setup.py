from pathlib import Path

import numpy as np
from Cython.Build import cythonize
from setuptools import setup

directives = {
    "language_level": 3,
    "boundscheck": False,
    "wraparound": False,
    "initializedcheck": False,
    "cdivision": True,
}

extensions = cythonize(
    [str(Path("src") / "dscatter" / "_fastkern.pyx")],
    compiler_directives=directives,
)
for ext in extensions:
    ext.include_dirs.append(np.get_include())

setup(ext_modules=extensions)
