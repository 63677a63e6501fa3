"""cantorfg: fundamental groups of Cantor minimal systems
"""

import os
from setuptools import setup, find_packages

# #########################
VERSION = '0.1.0'
ISRELEASED = True
__version__ = VERSION
# #########################

setup(
    name="cantorfg",
    description="Fundamental groups of odometers and Denjoy systems, with exact clopen constructions",
    long_description=(
        open("README.md").read() if os.path.exists("README.md")
        else "Fundamental groups of Cantor minimal systems"
    ),
    long_description_content_type="text/markdown",
    version=__version__,
    platforms=["Linux", "Mac OS-X", "Unix", "Windows"],
    python_requires=">=3.8",
    packages=find_packages(),
    zip_safe=False,
    install_requires=[
        "sympy>=1.12",
        "mpmath",
        "pandas",
        "click>=8",
        "tomli; python_version<'3.11'",
    ],
    extras_require={
        "test": ["pytest", "pytest-mock", "hypothesis"],
    },
    entry_points={
        "console_scripts": [
            "cantor-fg = cantorfg.scripts.cli:main",
        ]
    },
    license="GPL-2.0-or-later",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: GNU General Public License v2 or later (GPLv2+)",
        "Operating System :: OS Independent",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
)
