"""Bell-test analysis toolkit: entanglement and incompatibility certificates,
trial simulation, PBR hypothesis testing and two-qubit tomography."""

from ._bellkit import *  # noqa: F401,F403
from ._bellkit import Error, version  # noqa: F401

__version__ = version()
