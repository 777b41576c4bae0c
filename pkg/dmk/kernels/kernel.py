r"""Radial kernels and their Fourier and Gaussian-integral representations.

All kernels are used in their raw form (1/r, log r, ...) without the
normalization constants of the corresponding Green's functions.
"""

import copy
import math
import numpy as np
import scipy.special
from dmk.classes import NamedInstanceClass
from dmk.config import config
from dmk.math.functions import bessel_k0, bessel_k1


class Kernel(NamedInstanceClass):
    """A non-oscillatory radial kernel K(r) in d dimensions.

    Parameters
    ----------
     - name: string
     - d: dimension (2 or 3)

    Subclasses implement `__call__`, `fourier` and the Gaussian integral
    representation `sog_weights`.
    """

    family = None
    #: Fourier transform is s/(k^2 + lambda^2) with s = `fourier_scale`
    harmonic = False

    def __init__(self, name, d, register=True):
        if register:
            super().__init__(name)
        else:
            self.name = name
            self.description = ''
        if d not in (2, 3):
            raise ValueError("dimension must be 2 or 3, got {}".format(d))
        self.d = d

    def __repr__(self):
        return "{}({})".format(self.name, ', '.join(
            '{}={}'.format(k, v) for k, v in self.params().items()))

    def params(self):
        return {}

    def with_param(self, **kwargs):
        """Unregistered copy of the kernel with modified parameters."""
        new = copy.copy(self)
        for k, v in kwargs.items():
            if k not in self.params() and k != 'd':
                raise ValueError("{} has no parameter '{}'".format(self.name, k))
            setattr(new, k, v)
        new._validate()
        return new

    def _validate(self):
        if self.d not in (2, 3):
            raise ValueError("dimension must be 2 or 3, got {}".format(self.d))

    @property
    def homogeneity(self):
        """alpha for kernels with K(s r) = s^-alpha K(r); 0 for log r (which
        is homogeneous up to an additive constant); None otherwise."""
        return None

    @property
    def leaf_size_key(self):
        return self.name

    def sog_reference(self, t):
        """Term subtracted from each Gaussian in the integral representation
        (nonzero only for log r)."""
        return np.zeros_like(t)

    def sog_constant(self, t, w):
        """Additive constant of a Gaussian representation with nodes t and
        weights w."""
        return -np.sum(w * self.sog_reference(t))

    def truncated_fourier(self, k, R):
        """Fourier transform of the kernel restricted to r <= R."""
        raise NotImplementedError("No closed-form truncated transform for " + self.name)


class PowerKernel(Kernel):
    r"""$1/r^\alpha$ with $0 < \alpha \le 2$."""

    family = 'Power'

    def __init__(self, name, d, alpha, register=True):
        super().__init__(name, d, register=register)
        self.alpha = float(alpha)
        self._validate()

    def _validate(self):
        super()._validate()
        if not 0 < self.alpha <= 2:
            raise ValueError("power kernel needs 0 < alpha <= 2, got {}".format(self.alpha))
        self.harmonic = self.alpha == self.d - 2

    def params(self):
        return {'alpha': self.alpha}

    @property
    def homogeneity(self):
        return self.alpha

    @property
    def leaf_size_key(self):
        if self.name == 'Power':
            return 'Power{}D'.format(self.d)
        return self.name

    @property
    def fourier_scale(self):
        a, d = self.alpha, self.d
        return math.pi**(d / 2) * 2**(d - a) * math.gamma((d - a) / 2) / math.gamma(a / 2)

    @property
    def lam(self):
        return 0.

    def __call__(self, r):
        return np.asarray(r, dtype=float)**-self.alpha

    def fourier(self, k):
        return self.fourier_scale * np.asarray(k, dtype=float)**(self.alpha - self.d)

    def truncated_fourier(self, k, R):
        if not self.harmonic:
            return super().truncated_fourier(k, R)
        k = np.asarray(k, dtype=float)
        # 1/r in 3D: 8 pi sin^2(kR/2)/k^2
        with np.errstate(divide='ignore', invalid='ignore'):
            out = 8 * np.pi * np.sin(k * R / 2)**2 / k**2
        return np.where(k == 0, 2 * np.pi * R**2, out)

    def sog_weights(self, u, h):
        # 1/r^a = 2/Gamma(a/2) int exp(-r^2 t^2) t^(a-1) dt, t = e^u
        a = self.alpha
        return np.exp(u), 2 * h / math.gamma(a / 2) * np.exp(a * u)


class YukawaKernel(Kernel):
    r"""$e^{-\lambda r}/r$ in 3D and $K_0(\lambda r)$ in 2D."""

    family = 'Yukawa'
    harmonic = True

    def __init__(self, name, d, lam, register=True):
        super().__init__(name, d, register=register)
        self.lam = float(lam)
        self._validate()

    def _validate(self):
        super()._validate()
        if not self.lam > 0:
            raise ValueError("Yukawa parameter must be positive, got {}".format(self.lam))

    def params(self):
        return {'lam': self.lam}

    @property
    def fourier_scale(self):
        return 4 * np.pi if self.d == 3 else 2 * np.pi

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.d == 3:
            return np.exp(-self.lam * r) / r
        return bessel_k0(self.lam * r)

    def fourier(self, k):
        return self.fourier_scale / (np.asarray(k, dtype=float)**2 + self.lam**2)

    def truncated_fourier(self, k, R):
        k = np.asarray(k, dtype=float)
        lam = self.lam
        if self.d == 3:
            with np.errstate(divide='ignore', invalid='ignore'):
                s = np.where(k == 0, R, np.sin(k * R) / np.where(k == 0, 1, k))
            return 4 * np.pi * (1 - np.exp(-lam * R) * (np.cos(k * R) + lam * s)) \
                / (k**2 + lam**2)
        kr = k * R
        return 2 * np.pi * (1 + kr * scipy.special.j1(kr) * bessel_k0(lam * R)
                            - lam * R * scipy.special.j0(kr) * bessel_k1(lam * R)) \
            / (k**2 + lam**2)

    def sog_weights(self, u, h):
        lam = self.lam
        t = np.exp(u)
        if self.d == 3:
            # e^(-lam r)/r = 2/sqrt(pi) int exp(-r^2 e^2u - lam^2 e^-2u / 4 + u) du
            return t, 2 * h / math.sqrt(math.pi) * np.exp(u - lam**2 / (4 * t**2))
        return t, h * np.exp(-lam**2 / (4 * t**2))


class LogKernel(Kernel):
    """log r in 2D."""

    family = 'Laplace'
    harmonic = True
    fourier_scale = -2 * np.pi
    lam = 0.

    def __init__(self, name, register=True):
        super().__init__(name, 2, register=register)

    @property
    def homogeneity(self):
        return 0.

    def __call__(self, r):
        return np.log(np.asarray(r, dtype=float))

    def fourier(self, k):
        return self.fourier_scale / np.asarray(k, dtype=float)**2

    def truncated_fourier(self, k, R):
        k = np.asarray(k, dtype=float)
        kk = np.where(k == 0, 1., k)
        kr = kk * R
        out = 2 * np.pi * (R * math.log(R) * scipy.special.j1(kr) / kk
                           - (1 - scipy.special.j0(kr)) / kk**2)
        return np.where(k == 0, 2 * np.pi * (R**2 * math.log(R) / 2 - R**2 / 4), out)

    def sog_weights(self, u, h):
        # log r = int (exp(-t^2) - exp(-r^2 t^2)) dt/t, t = e^u
        t = np.exp(u)
        return t, -h * np.ones_like(t)

    def sog_reference(self, t):
        return np.exp(-t**2)


def get_kernel(name, d=None, lam=None, alpha=None):
    """Return the registered kernel `name`, with parameters replaced where
    given."""
    kernel = Kernel[name]
    changes = {}
    if lam is not None:
        if 'lam' not in kernel.params():
            raise ValueError("{} has no parameter lambda".format(name))
        changes['lam'] = lam
    if alpha is not None:
        if 'alpha' not in kernel.params() or name != 'Power':
            raise ValueError("{} has no parameter alpha".format(name))
        changes['alpha'] = alpha
    if d is not None and d != kernel.d:
        if name != 'Power':
            raise ValueError("{} is only defined for d = {}".format(name, kernel.d))
        changes['d'] = d
    return kernel.with_param(**changes) if changes else kernel


_k = PowerKernel('Laplace3D', 3, 1)
_k.set_description(r"$1/r$ in three dimensions")
_k = PowerKernel('SqrtLaplace3D', 3, 2)
_k.set_description(r"$1/r^2$ in three dimensions")
_k = PowerKernel('SqrtLaplace2D', 2, 1)
_k.set_description(r"$1/r$ in two dimensions")
_k = PowerKernel('Power', 3, config['split']['alpha'])
_k.set_description(r"$1/r^\alpha$, $0 < \alpha \le 2$")
_k = YukawaKernel('Yukawa3D', 3, config['split']['lambda'])
_k.set_description(r"$e^{-\lambda r}/r$")
_k = YukawaKernel('Yukawa2D', 2, config['split']['lambda'])
_k.set_description(r"$K_0(\lambda r)$")
_k = LogKernel('Laplace2D')
_k.set_description(r"$\log r$ in two dimensions")
del _k
