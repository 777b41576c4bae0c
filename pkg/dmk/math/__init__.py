"""Module containing mathematical functions."""

from . import functions
from . import integrate
from . import pswf
from . import tabulate
