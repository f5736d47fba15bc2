"""Input checks for the estimator interface."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils import check_array


def check_views(X, view_dims=None) -> list[np.ndarray]:
    """Coerce ``X`` into a list of ``(n, d_v)`` float arrays.

    ``X`` is either a sequence of per-view arrays, or a single 2-D array
    whose columns are split into views of widths ``view_dims``.
    """
    if isinstance(X, (list, tuple)):
        if view_dims is not None:
            raise ValueError("view_dims is only used when X is a single 2-D array")
        views = [check_array(np.asarray(x, dtype=float).reshape(len(x), -1), dtype=np.float64)
                 for x in X]
    else:
        arr = check_array(X, dtype=np.float64)
        if view_dims is None:
            raise ValueError("a single array needs view_dims to split its columns into views")
        dims = [int(d) for d in view_dims]
        if min(dims) < 1 or sum(dims) != arr.shape[1]:
            raise ValueError(f"view_dims {dims} do not add up to {arr.shape[1]} columns")
        edges = np.cumsum([0] + dims)
        views = [arr[:, a:b] for a, b in zip(edges[:-1], edges[1:])]
    if len(views) < 2:
        raise ValueError("at least two views are required")
    n = views[0].shape[0]
    for v, x in enumerate(views):
        if x.shape[0] != n:
            raise ValueError(f"view {v + 1} has {x.shape[0]} rows, expected {n}")
    return views


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_per_view(value, n_views: int, name: str, cast=float) -> tuple:
    """Broadcast a scalar, or check a sequence has one entry per view."""
    if np.ndim(value) == 0:
        return (cast(value),) * n_views
    out = tuple(cast(v) for v in value)
    if len(out) != n_views:
        raise ValueError(f"{name} needs {n_views} entries, got {len(out)}")
    return out


def standardize_views(views, specs):
    """Z-score Gaussian views column-wise; scale regression responses only.

    Zero-variance columns are centred but not scaled. A regression view is
    divided by its standard deviation without centring, so the no-intercept
    model keeps its meaning; its covariate is the transformed covariate view.
    """
    from .kernels import RegressionViewSpec

    out = []
    for X, spec in zip(views, specs):
        sd = X.std(axis=0)
        safe = np.where(sd > 0, sd, 1.0)
        if isinstance(spec, RegressionViewSpec):
            out.append(X / safe)
        else:
            out.append((X - X.mean(axis=0)) / safe)
    return out
