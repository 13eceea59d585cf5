"""Contact charts on the thermodynamic phase space and Legendre patches.

A simple chart with ``d`` intensive/extensive pairs has the ``2d + 1``
coordinates ``(x_1..x_{d-1}, T, y_1..y_{d-1}, S, U)`` and carries the
contact form ``dU - T dS + sum_i x_i dy_i``. Composite charts are
concatenations of simple factors whose forms add up.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._numdiff import central_partial, directional, relative_step
from .errors import DimensionError, DomainError


@dataclass(frozen=True)
class ContactChart:
    d: int
    coordinate_names: tuple[str, ...]
    # number of pairs of each simple factor; ``(d,)`` for a simple chart
    factors: tuple[int, ...] = ()

    def __post_init__(self):
        names = tuple(self.coordinate_names)
        object.__setattr__(self, "coordinate_names", names)
        factors = tuple(self.factors) or (self.d,)
        object.__setattr__(self, "factors", factors)
        if any(k < 1 for k in factors) or self.d < 1:
            raise DimensionError("every chart factor needs d >= 1")
        if sum(factors) != self.d:
            raise DimensionError(f"factor sizes {factors} do not add up to d={self.d}")
        expected = sum(2 * k + 1 for k in factors)
        if len(names) != expected:
            raise DimensionError(f"expected {expected} coordinate names, got {len(names)}")
        if len(set(names)) != len(names):
            raise DimensionError(f"duplicate coordinate names in {names}")
        for required in ("T", "S", "U"):
            if required not in names:
                raise DimensionError(f"chart lacks the {required!r} coordinate")

    @classmethod
    def simple(cls, pairs: Sequence[tuple[str, str]] = (), *, temperature="T",
               entropy="S", energy="U") -> "ContactChart":
        """Chart from (intensive, extensive) name pairs, e.g. ``[("P", "V")]``."""
        xs = [p[0] for p in pairs]
        ys = [p[1] for p in pairs]
        names = (*xs, temperature, *ys, entropy, energy)
        return cls(len(pairs) + 1, names)

    @property
    def dim(self) -> int:
        return len(self.coordinate_names)

    def index(self, name: str) -> int:
        return self.coordinate_names.index(name)

    def blocks(self):
        """Yield ``(x_idx, T_idx, y_idx, S_idx, U_idx)`` for each simple factor."""
        offset = 0
        for k in self.factors:
            xs = list(range(offset, offset + k - 1))
            t = offset + k - 1
            ys = list(range(offset + k, offset + 2 * k - 1))
            s = offset + 2 * k - 1
            u = offset + 2 * k
            yield xs, t, ys, s, u
            offset += 2 * k + 1

    def temperature_indices(self) -> list[int]:
        return [b[1] for b in self.blocks()]


@dataclass(frozen=True)
class TangentThermo:
    base: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float)
        delta = np.asarray(self.delta, dtype=float)
        if base.shape != delta.shape or base.ndim != 1:
            raise DimensionError("base and delta must be vectors of equal length")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "delta", delta)


def contact_form(chart: ContactChart, v: TangentThermo) -> float:
    """Evaluate ``dU - T dS + sum x_i dy_i`` (summed over factors) on ``v``."""
    if v.base.shape[0] != chart.dim:
        raise DimensionError(f"tangent has {v.base.shape[0]} components, chart has {chart.dim}")
    base, delta = v.base, v.delta
    total = 0.0
    for xs, t, ys, s, u in chart.blocks():
        if not base[t] > 0:
            raise DomainError(f"non-positive temperature {base[t]!r} at coordinate "
                              f"{chart.coordinate_names[t]!r}")
        total += delta[u] - base[t] * delta[s]
        for xi, yi in zip(xs, ys):
            total += base[xi] * delta[yi]
    return float(total)


def composite_chart(a: ContactChart, b: ContactChart, suffix: str = "_c") -> ContactChart:
    """Product chart of two thermodynamic systems.

    Names of ``b`` colliding with names of ``a`` get ``suffix`` appended
    (then a counter, should that collide too).
    """
    if not isinstance(a, ContactChart) or not isinstance(b, ContactChart):
        raise TypeError("composite_chart expects two ContactChart instances")
    taken = set(a.coordinate_names)
    renamed = []
    for name in b.coordinate_names:
        new = name
        if new in taken:
            new = name + suffix
            n = 2
            while new in taken:
                new = f"{name}{suffix}{n}"
                n += 1
        taken.add(new)
        renamed.append(new)
    return ContactChart(a.d + b.d, a.coordinate_names + tuple(renamed),
                        a.factors + b.factors)


@dataclass(frozen=True)
class FundamentalEquation:
    """``U = phi(y, S)`` with ``y`` the ``n_extensive`` extensive variables besides S.

    ``gradient(y, S)`` returns ``(dphi/dy, dphi/dS)`` when known analytically.
    ``domain(y, S)`` returns False outside the valid region.
    """

    phi: Callable[[np.ndarray, float], float]
    n_extensive: int = 0
    gradient: Callable[[np.ndarray, float], tuple[np.ndarray, float]] | None = None
    domain: Callable[[np.ndarray, float], bool] | None = None

    def in_domain(self, y, S) -> bool:
        return True if self.domain is None else bool(self.domain(np.asarray(y, float), S))

    def numeric_gradient(self, y, S) -> tuple[np.ndarray, float]:
        z = np.append(np.asarray(y, dtype=float), float(S))
        f = lambda w: self.phi(w[:-1], w[-1])
        g = np.array([central_partial(f, z, i, relative_step(z[i])) for i in range(z.size)])
        return g[:-1], float(g[-1])

    def gradient_mismatch(self, samples) -> float:
        """Largest relative gap between the analytic and central-difference gradients."""
        if self.gradient is None:
            return 0.0
        worst = 0.0
        for y, S in samples:
            ga_y, ga_s = self.gradient(np.asarray(y, float), S)
            gn_y, gn_s = self.numeric_gradient(y, S)
            a = np.append(ga_y, ga_s)
            n = np.append(gn_y, gn_s)
            worst = max(worst, float(np.max(np.abs(a - n) / np.maximum(np.abs(a), 1e-300))))
        return worst


def state_equations(phi: FundamentalEquation, y, S: float, *, analytic: bool = True) -> np.ndarray:
    """Chart point ``(x, T, y, S, U)`` on the Legendre submanifold of ``phi``.

    ``x = -dphi/dy``, ``T = dphi/dS``, ``U = phi``. Uses ``phi.gradient``
    when present (and ``analytic`` is true), central differences otherwise.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float)) if phi.n_extensive else np.zeros(0)
    if y.size != phi.n_extensive:
        raise DimensionError(f"expected {phi.n_extensive} extensive variables, got {y.size}")
    if not phi.in_domain(y, S):
        raise DomainError(f"(y={y.tolist()}, S={S!r}) outside the domain of the fundamental equation")
    if analytic and phi.gradient is not None:
        gy, gs = phi.gradient(y, S)
        gy = np.asarray(gy, dtype=float)
    else:
        gy, gs = phi.numeric_gradient(y, S)
    if not gs > 0:
        raise DomainError(f"computed temperature {gs!r} is not positive")
    U = float(phi.phi(y, S))
    return np.concatenate([-gy, [gs], y, [float(S)], [U]])


@dataclass(frozen=True)
class LegendrePatch:
    chart: ContactChart
    parametrization: Callable[[np.ndarray, float], np.ndarray]
    n_extensive: int = field(default=0)

    @classmethod
    def from_fundamental(cls, chart: ContactChart, phi: FundamentalEquation,
                         analytic: bool = True) -> "LegendrePatch":
        if chart.factors != (phi.n_extensive + 1,):
            raise DimensionError("fundamental equation does not match the chart size")
        return cls(chart, lambda y, S: state_equations(phi, y, S, analytic=analytic),
                   phi.n_extensive)

    def point(self, y, S) -> np.ndarray:
        return np.asarray(self.parametrization(np.asarray(y, dtype=float), float(S)), dtype=float)


def pullback_residual(patch: LegendrePatch, y, S: float) -> float:
    """Max ``|theta|`` over the coordinate tangents of the patch at ``(y, S)``.

    Zero (to rounding) certifies that the patch is Legendre there.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float)) if patch.n_extensive else np.zeros(0)
    z = np.append(y, float(S))
    f = lambda w: patch.point(w[:-1], w[-1])
    base = f(z)
    worst = 0.0
    for k in range(z.size):
        e = np.zeros_like(z)
        e[k] = 1.0
        # extensive y: step relative to the coordinate, since potentials like
        # V**(-1/alpha) vary on the scale of V; S carries an arbitrary offset,
        # so its step is absolute
        scale = 1.0 if k == z.size - 1 else max(abs(z[k]), 0.1)
        tangent = directional(f, z, e, scale=scale, order=6)
        worst = max(worst, abs(contact_form(patch.chart, TangentThermo(base, tangent))))
    return worst
