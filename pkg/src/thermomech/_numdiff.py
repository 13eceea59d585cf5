"""Finite-difference helpers shared by the geometry and constraint code."""

from __future__ import annotations

import numpy as np

EPS = np.finfo(float).eps
# eps**(1/3): optimal step for second-order central differences
CENTRAL_STEP = EPS ** (1.0 / 3.0)
# eps**(1/5): optimal step for the fourth-order five-point stencil
FIVE_POINT_STEP = EPS ** (1.0 / 5.0)


def relative_step(value: float, base: float = CENTRAL_STEP) -> float:
    return base * max(abs(value), 1.0)


def central_partial(f, z: np.ndarray, i: int, h: float | None = None) -> float:
    """Second-order central difference of ``f`` along coordinate ``i``."""
    if h is None:
        h = relative_step(z[i])
    zp = np.array(z, dtype=float)
    zm = np.array(z, dtype=float)
    zp[i] += h
    zm[i] -= h
    # use the representable step, not the nominal one
    return (f(zp) - f(zm)) / (zp[i] - zm[i])


def directional(f, z: np.ndarray, direction: np.ndarray, scale: float | None = None,
                order: int = 4):
    """Central derivative of ``f`` along ``direction`` at ``z``.

    ``order`` 4 uses the five-point stencil, ``order`` 6 the seven-point
    one; the step is ``eps**(1/(order+1)) * scale / |direction|_inf`` with
    ``scale`` defaulting to ``max(1, |z|_inf)``. Works for scalar- or
    vector-valued ``f``.
    """
    z = np.asarray(z, dtype=float)
    direction = np.asarray(direction, dtype=float)
    dnorm = np.max(np.abs(direction)) if direction.size else 0.0
    if dnorm == 0.0:
        return np.zeros_like(np.asarray(f(z), dtype=float))
    if scale is None:
        scale = max(1.0, float(np.max(np.abs(z))) if z.size else 1.0)
    try:
        offsets, weights, denom = _FIRST_DERIVATIVE_STENCILS[order]
    except KeyError:
        raise ValueError(f"unsupported stencil order {order}") from None
    h = EPS ** (1.0 / (order + 1)) * scale / dnorm
    acc = 0.0
    for k, w in zip(offsets, weights):
        acc = acc + w * np.asarray(f(z + k * h * direction), dtype=float)
    return acc / (denom * h)


_FIRST_DERIVATIVE_STENCILS = {
    2: ((-1, 1), (-1.0, 1.0), 2.0),
    4: ((-2, -1, 1, 2), (1.0, -8.0, 8.0, -1.0), 12.0),
    6: ((-3, -2, -1, 1, 2, 3), (-1.0, 9.0, -45.0, 45.0, -9.0, 1.0), 60.0),
}


def second_directional(f, z: np.ndarray, direction: np.ndarray):
    """Fourth-order second derivative of ``f`` along ``direction``."""
    z = np.asarray(z, dtype=float)
    direction = np.asarray(direction, dtype=float)
    dnorm = np.max(np.abs(direction)) if direction.size else 0.0
    if dnorm == 0.0:
        return np.zeros_like(np.asarray(f(z), dtype=float))
    scale = max(1.0, float(np.max(np.abs(z))))
    # eps**(1/6) balances h**4 truncation against eps/h**2 rounding
    h = EPS ** (1.0 / 6.0) * scale / dnorm
    f0 = np.asarray(f(z), dtype=float)
    f2p = np.asarray(f(z + 2 * h * direction), dtype=float)
    f1p = np.asarray(f(z + h * direction), dtype=float)
    f1m = np.asarray(f(z - h * direction), dtype=float)
    f2m = np.asarray(f(z - 2 * h * direction), dtype=float)
    return (-f2p + 16.0 * f1p - 30.0 * f0 + 16.0 * f1m - f2m) / (12.0 * h * h)


def fornberg_weights(x0: float, nodes: np.ndarray, order: int) -> np.ndarray:
    """Finite-difference weights on arbitrary ``nodes`` for derivatives at ``x0``.

    Returns an array of shape ``(order + 1, len(nodes))``; row ``k`` holds
    the weights of the k-th derivative (Fornberg 1988).
    """
    n = len(nodes)
    c = np.zeros((order + 1, n))
    c1 = 1.0
    c4 = nodes[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def grid_derivatives(times: np.ndarray, values: np.ndarray, width: int = 5):
    """First and second time derivatives of sampled ``values`` (rows = samples).

    Interior samples use a centered ``width``-point stencil; the first and
    last ``width // 2`` samples use one-sided stencils of the same width.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    n = len(times)
    if n < width:
        raise ValueError(f"need at least {width} samples, got {n}")
    half = width // 2
    d1 = np.empty_like(values)
    d2 = np.empty_like(values)
    spacing = np.diff(times)
    uniform = np.allclose(spacing, spacing[0], rtol=1e-9, atol=0.0)
    if uniform:
        w = fornberg_weights(0.0, np.arange(-half, half + 1, dtype=float), 2)
        h = spacing[0]
        acc1 = np.zeros_like(values[half:n - half])
        acc2 = np.zeros_like(values[half:n - half])
        for k in range(width):
            block = values[k:n - width + 1 + k]
            acc1 += w[1, k] * block
            acc2 += w[2, k] * block
        d1[half:n - half] = acc1 / h
        d2[half:n - half] = acc2 / (h * h)
        rows = list(range(half)) + list(range(n - half, n))
    else:
        rows = range(n)
    for i in rows:
        lo = min(max(i - half, 0), n - width)
        idx = slice(lo, lo + width)
        w = fornberg_weights(times[i], times[idx], 2)
        d1[i] = w[1] @ values[idx]
        d2[i] = w[2] @ values[idx]
    return d1, d2
