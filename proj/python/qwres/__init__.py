"""Eigenvalues and resonances of finitely perturbed 2D quantum walks."""

from ._qwres import *  # noqa: F401,F403
from ._qwres import __version__  # noqa: F401
