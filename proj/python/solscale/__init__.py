"""Scaling-group experiments on Sol-type lattices and glued spaces."""

from ._solscale import *  # noqa: F401,F403
from ._solscale import __doc__  # noqa: F401
