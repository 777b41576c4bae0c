import os
import numpy as np


class CapacityError(ValueError):
    """Tree depth cap exceeded (usually coincident points)."""


class RefinementLimitError(ValueError):
    """Adaptive refinement of a table or a density did not terminate."""


class ConvergenceError(ValueError):
    """A series or quadrature did not reach the requested accuracy."""


class UnsupportedError(ValueError):
    """Kernel, dimension or splitting scheme outside the supported set."""


class SizeGuardError(ValueError):
    """A brute-force computation would be too large."""


def table_cache_dir():
    """Directory for cached tables, or None if caching is disabled.

    Set through the environment variable `DMK_TABLE_CACHE`."""
    path = os.environ.get('DMK_TABLE_CACHE')
    if not path:
        return None
    os.makedirs(path, exist_ok=True)
    return path


def check_unit_box(points, d, what='points'):
    """Return `points` as a float array of shape (n, d) after checking that
    all of them lie in the unit box [-1/2, 1/2]^d."""
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        return points.reshape(0, d)
    if points.ndim != 2 or points.shape[1] != d:
        raise ValueError("{} must have shape (n, {}), got {}".format(
            what, d, points.shape))
    if not np.all(np.isfinite(points)):
        raise ValueError("{} contain non-finite coordinates".format(what))
    if np.any(np.abs(points) > 0.5):
        raise ValueError("{} must lie in [-1/2, 1/2]^{}; rescale first".format(
            what, d))
    return points


def rel_max_error(u, u_ref):
    """Maximum absolute deviation normalized by max |u_ref|."""
    u = np.asarray(u)
    u_ref = np.asarray(u_ref)
    scale = np.max(np.abs(u_ref))
    if scale == 0:
        return float(np.max(np.abs(u - u_ref), initial=0.))
    return float(np.max(np.abs(u - u_ref)) / scale)
