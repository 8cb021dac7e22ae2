# coding: utf-8
"""Private mutual authentication and private service discovery."""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
from ._version import __version__
from ._version import version_info
from .crypto.prefix import HierName
from .crypto.prefix import PrefixPolicy
from .crypto.prefix import satisfies
from .error import *
from .principals import bless
from .principals import Deployment
from .principals import new_root
from .principals import Principal
from .principals import SigningKeyPair
from .principals import validate_chain
