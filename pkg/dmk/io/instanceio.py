"""Load and dump run configurations from and to YAML dictionaries or
streams."""

import warnings
import voluptuous as vol
import yaml
from dmk.kernels import Kernel, SplitScheme, get_kernel
from dmk.kernels.params import EPS_RANGE
from dmk.kernels.split import supported_schemes
from dmk.util import UnsupportedError


class YAMLLoadable(object):
    """Base class for objects that can be loaded and dumped from and to
    a dict or YAML stream."""

    # these class attributes should be overwritten by child classes
    _input_schema_dict = {}
    _output_schema_dict = {}

    @classmethod
    def input_schema(cls):
        return vol.Schema(cls._input_schema_dict, extra=vol.ALLOW_EXTRA)

    @classmethod
    def output_schema(cls):
        return vol.Schema(cls._output_schema_dict, extra=vol.REMOVE_EXTRA)

    @classmethod
    def load_dict(cls, d, **kwargs):
        """Instantiate an object from a YAML dictionary."""
        schema = cls.input_schema()
        return cls(**schema(d), **kwargs)

    @classmethod
    def load(cls, f, **kwargs):
        """Instantiate an object from a YAML string or stream."""
        d = yaml.safe_load(f)
        return cls.load_dict(d, **kwargs)

    def get_yaml_dict(self):
        """Dump the object to a YAML dictionary."""
        d = self.__dict__.copy()
        schema = self.output_schema()
        d = schema(d)
        # remove NoneTypes and empty lists
        d = {k: v for k, v in d.items() if v is not None and v != []}
        return d

    def dump(self, stream=None, **kwargs):
        """Dump the object to a YAML string or stream."""
        d = self.get_yaml_dict()
        return yaml.dump(d, stream=stream, **kwargs)


COMMANDS = ['points', 'boxes', 'verify', 'bench', 'dump-params']
DISTRIBUTIONS = ['uniform', 'sphere', 'circle']
FORMATS = ['json', 'csv']

_positive_int = vol.All(vol.Coerce(int), vol.Range(min=1))
_positive_float = vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))


def _eps(value):
    value = float(value)
    if not EPS_RANGE[0] * (1 - 1e-9) <= value <= EPS_RANGE[1] * (1 + 1e-9):
        raise vol.Invalid("eps must be in [{:g}, {:g}]".format(*EPS_RANGE))
    return value


def _kernel_name(value):
    if value not in Kernel:
        raise vol.Invalid("unknown kernel '{}'".format(value))
    return value


def _scheme_name(value):
    if value is not None and value not in SplitScheme:
        raise vol.Invalid("unknown splitting scheme '{}'".format(value))
    return value


class RunConfig(YAMLLoadable):
    """Validated settings of one command-line run.

    Parameters
    ----------
     - command: one of `COMMANDS`
     - kernel, scheme: kernel name and splitting scheme (None for the default)
     - dim: dimension, needed only for the generic power kernel
     - eps: requested precision
     - n, dist, ns, seed: point problem size, distribution, leaf capacity
       and random seed
     - out, format: report path (None for stdout) and format
     - density: analytic problem name or path of a density file (box code)
     - q: Legendre order of the box code
     - lam, alpha: kernel parameters
     - tree_dump: path of the JSON tree dump
     - ladder: problem sizes of `bench`
    """

    _input_schema_dict = {
        vol.Required('command'): vol.In(COMMANDS),
        'kernel': _kernel_name,
        'scheme': _scheme_name,
        'dim': vol.Any(None, vol.All(vol.Coerce(int), vol.In([2, 3]))),
        'eps': _eps,
        'n': _positive_int,
        'dist': vol.In(DISTRIBUTIONS),
        'ns': vol.Any(None, _positive_int),
        'seed': vol.Coerce(int),
        'out': vol.Any(None, str),
        'format': vol.In(FORMATS),
        'density': vol.Any(None, str),
        'q': vol.Any(None, vol.All(vol.Coerce(int), vol.Range(min=4, max=24))),
        'lam': vol.Any(None, _positive_float),
        'alpha': vol.Any(None, vol.All(vol.Coerce(float),
                                       vol.Range(min=0, max=2, min_included=False))),
        'tree_dump': vol.Any(None, str),
        'ladder': vol.Any(None, [_positive_int]),
    }

    _output_schema_dict = {
        'command': str,
        'kernel': str,
        'scheme': vol.Any(None, str),
        'dim': vol.Any(None, int),
        'eps': float,
        'n': int,
        'dist': str,
        'ns': vol.Any(None, int),
        'seed': int,
        'format': str,
        'density': vol.Any(None, str),
        'q': vol.Any(None, int),
        'lam': vol.Any(None, float),
        'alpha': vol.Any(None, float),
        'ladder': vol.Any(None, [int]),
    }

    def __init__(self, command, kernel='Laplace3D', scheme=None, dim=None, eps=1e-6,
                 n=1000, dist='uniform', ns=None, seed=0, out=None, format='json',
                 density=None, q=None, lam=None, alpha=None, tree_dump=None, ladder=None,
                 **extra):
        if extra:
            warnings.warn("Ignoring unknown settings: {}".format(', '.join(sorted(extra))))
        self.command = command
        self.kernel = kernel
        self.scheme = scheme
        self.dim = dim
        self.eps = eps
        self.n = n
        self.dist = dist
        self.ns = ns
        self.seed = seed
        self.out = out
        self.format = format
        self.density = density
        self.q = q
        self.lam = lam
        self.alpha = alpha
        self.tree_dump = tree_dump
        self.ladder = ladder

    def __repr__(self):
        return "RunConfig({})".format(', '.join(
            '{}={!r}'.format(k, v) for k, v in self.get_yaml_dict().items()))

    def get_kernel(self):
        """The kernel with the configured dimension and parameters.

        Raises `UnsupportedError` for kernels, dimensions and schemes outside
        the support matrix."""
        try:
            kernel = get_kernel(self.kernel, self.dim, self.lam, self.alpha)
        except ValueError as e:
            raise UnsupportedError(str(e))
        if self.scheme is not None and self.scheme not in supported_schemes(kernel):
            raise UnsupportedError("Scheme {} is not available for {}; use one of {}".format(
                self.scheme, kernel.name, ', '.join(supported_schemes(kernel))))
        return kernel

    def scheme_name(self, kernel):
        return self.scheme or supported_schemes(kernel)[0]
