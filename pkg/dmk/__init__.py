from ._version import __version__
from . import math
from . import kernels
from . import io
from . import classes
from .config import config
from .kernels import Kernel, SplitScheme, make_split
from .tree import build_point_tree, build_density_tree
from .points import PointProblem, run_dmk, run_multilevel_ewald, direct_sum
from .boxes import run_box_dmk
