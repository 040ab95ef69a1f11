"""
setup — packaging script for hybridexec
"""

# Classifiers taken from the Python Software Foundation. Classifiers.
#  https://pypi.org/classifiers/

import os
import re
from setuptools import setup, find_packages

# Vital Info
#
HERE = os.path.dirname(__file__)

# README: Dump the contents of README.rst
with open(os.path.join(HERE, 'README.rst')) as readme:
    README=readme.read()

# Version: the package's __version__ is the only source
with open(os.path.join(HERE, 'hybridexec', '__init__.py')) as init:
    VERSION = re.search(
        r"^__version__ = '([^']+)'", init.read(), re.MULTILINE
    ).group(1)

# Invocation of setup()
#
setup(
    name="hybridexec",
    version=VERSION,
    packages=find_packages(exclude=["*tests*", "*demos*"]),
    package_data={"hybridexec": ["configs/*.json"]},
    python_requires=">=3.7",
    install_requires=[
        "numpy>=1.17",
        "scipy>=1.4",
        "matplotlib>=3.1",
    ],
    entry_points={
        "console_scripts": ["hybridexec=hybridexec.cli:main"],
    },
    author="The hybridexec Authors",
    description="""Optimal execution of a large order against transient
    impact from market-maker inventories and propagator impact""",
    keywords="optimal execution market impact riccati monte-carlo finance",
    long_description=README,
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Financial and Insurance Industry",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: GNU General Public License v3 or later (GPLv3+)",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3.7",
        "Topic :: Office/Business :: Financial :: Investment",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
)
