"""Kernels, their multilevel splits and the precision-dependent parameters."""

from . import kernel
from . import params
from . import sog
from . import split
from .kernel import Kernel, get_kernel
from .split import SplitScheme, KernelSplit, FourierGrid, make_split
