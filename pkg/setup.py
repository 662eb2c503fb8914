#! /usr/bin/env python
"""Setup for equiloc
"""
from setuptools import setup


setup(
    name="equiloc",
    version=0.1,
    description="Numerical verification of equivariant localization formulas on test manifolds",
    # long_description=read('README.md'),
    packages=["equiloc"],
    package_data={
        "equiloc": [
            "data/scenarios/*.json",
        ]
    },
    python_requires=">=3.8",
    install_requires=[
        "numpy",
        "pandas",
        "sympy",
        "python-decouple",
    ],
    entry_points={
        "console_scripts": [
            "equiloc=equiloc.cli:main",
        ],
    },
    setup_requires=["pytest-runner"],
    tests_require=["pytest", "scipy", "PyYAML"],
)
