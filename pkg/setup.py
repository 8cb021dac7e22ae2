#!/usr/bin/env python
# coding: utf-8
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.

# the name of the project
name = 'privdisc'

# -----------------------------------------------------------------------------
# Minimal Python version sanity check
# -----------------------------------------------------------------------------

import sys

v = sys.version_info
if v[:2] < (3, 8):
    error = "ERROR: %s requires Python version 3.8 or above." % name
    print(error, file=sys.stderr)
    sys.exit(1)

# -----------------------------------------------------------------------------
# get on with it
# -----------------------------------------------------------------------------

import os

from setuptools import setup

pjoin = os.path.join
here = os.path.abspath(os.path.dirname(__file__))

packages = []
for d, _, _ in os.walk(pjoin(here, name)):
    if os.path.exists(pjoin(d, '__init__.py')):
        packages.append(d[len(here) + 1 :].replace(os.path.sep, '.'))

version_ns = {}
with open(pjoin(here, name, '_version.py')) as f:
    exec(f.read(), {}, version_ns)


setup_args = dict(
    name=name,
    version=version_ns["__version__"],
    packages=packages,
    description="Private mutual authentication and private service discovery",
    long_description="""Handshakes and service broadcasts that reveal a
    device's identity only to peers its policy authorizes, built on
    identity-based encryption over name prefixes.
    """,
    author="privdisc Development Team",
    license="BSD",
    platforms="Linux, Mac OS X, Windows",
    keywords=["Privacy", "Authentication", "Discovery", "IBE", "Pairing"],
    classifiers=[
        "Intended Audience :: Developers",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: BSD License",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Security :: Cryptography",
    ],
    install_requires=[
        "decorator",
        "pyzmq>=13",
        "traitlets>=5",
        "python-dateutil>=2.1",
        "py_ecc>=6",
        "cryptography>=42",
        "zeroconf>=0.38",
    ],
    python_requires=">=3.8",
    extras_require={
        "test": ["pytest", "pytest-cov"],
        # C pairings (PBC); needs libpbc and libgmp to build
        "native": ["charm-crypto"],
    },
    entry_points={
        "console_scripts": [
            "privdisc = privdisc.apps.privdiscapp:launch_new_instance",
        ]
    },
)


if __name__ == "__main__":
    setup(**setup_args)
