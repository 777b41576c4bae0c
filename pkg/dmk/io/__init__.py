"""Functions for input and output."""

from . import instanceio
from . import report
from . import density
