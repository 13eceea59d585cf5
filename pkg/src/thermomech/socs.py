"""Second-order constrained systems (SOCS).

A SOCS is a Lagrangian ``L(q, qdot)`` together with kinematic constraints
``w(q, qdot, qddot) = 0`` on jets and linear variational constraints
``vmat(q, qdot) @ dq = 0`` on admissible variations. A curve is a
trajectory when its jets satisfy ``w = 0`` and the Euler-Lagrange residual
annihilates every admissible variation. Everything here is chart-level.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._numdiff import directional, second_directional
from .errors import ConstraintRankError, DimensionError, InconsistentJetError, ThermomechError
from .ode import ReducedODE

DEFAULT_PIVOT_TOL = 1e-10


@dataclass(frozen=True)
class Jet2:
    q: np.ndarray
    qdot: np.ndarray
    qddot: np.ndarray

    def __post_init__(self):
        arrays = [np.atleast_1d(np.asarray(a, dtype=float)) for a in (self.q, self.qdot, self.qddot)]
        if not (arrays[0].shape == arrays[1].shape == arrays[2].shape) or arrays[0].ndim != 1:
            raise DimensionError("q, qdot and qddot must be vectors of equal length")
        object.__setattr__(self, "q", arrays[0])
        object.__setattr__(self, "qdot", arrays[1])
        object.__setattr__(self, "qddot", arrays[2])

    @property
    def n(self) -> int:
        return self.q.shape[0]


@dataclass(frozen=True)
class KinematicConstraints:
    w: Callable[[Jet2], np.ndarray]
    names: tuple[str, ...] = ()

    @classmethod
    def none(cls) -> "KinematicConstraints":
        return cls(lambda jet: np.zeros(0))


@dataclass(frozen=True)
class VariationalConstraints:
    vmat: Callable[[np.ndarray, np.ndarray], np.ndarray]

    @classmethod
    def none(cls, n: int) -> "VariationalConstraints":
        return cls(lambda q, qdot: np.zeros((0, n)))


@dataclass(frozen=True)
class SecondLawPolicy:
    """Which coordinates enter the entropy balance.

    ``entropy_indices`` are summed into the total entropy; heat crosses the
    system boundary at the temperature stored at ``temperature_index``.
    """

    entropy_indices: tuple[int, ...]
    temperature_index: int
    tolerance: float = 1e-8


def _zero_heat(q, qdot) -> float:
    return 0.0


@dataclass(frozen=True)
class SOCSystem:
    """A SOCS on ``Q = M x T`` with ``mech_dim`` mechanical coordinates first.

    ``heat_form(q, qdot)`` returns the heat exchange rate, i.e. the pairing
    of the heat one-form with the velocity. ``energy`` defaults to the
    Lagrangian energy ``<dL/dqdot, qdot> - L`` computed numerically.
    """

    n: int
    mech_dim: int
    lagrangian: Callable[[np.ndarray, np.ndarray], float]
    ck: KinematicConstraints
    cv: VariationalConstraints
    heat_form: Callable[[np.ndarray, np.ndarray], float] = _zero_heat
    energy: Callable[[np.ndarray, np.ndarray], float] | None = None
    second_law: SecondLawPolicy | None = None
    coordinate_names: tuple[str, ...] = ()
    # covector F(q, qdot) of the external force map, when the system has one
    force_map: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    l_mec: Callable[[np.ndarray, np.ndarray], float] | None = None
    internal_energy: Callable[[np.ndarray], float] | None = None
    pivot_tol: float = DEFAULT_PIVOT_TOL

    def __post_init__(self):
        if not 0 <= self.mech_dim <= self.n:
            raise DimensionError(f"mech_dim={self.mech_dim} outside [0, n={self.n}]")
        if self.coordinate_names and len(self.coordinate_names) != self.n:
            raise DimensionError("coordinate_names must have n entries")
        if self.energy is None:
            object.__setattr__(self, "energy", lambda q, qdot: lagrangian_energy(self.lagrangian, q, qdot))

    @classmethod
    def thermo_mechanical(cls, *, n: int, mech_dim: int, l_mec, internal_energy, ck, cv,
                          mech_energy=None, **kwargs) -> "SOCSystem":
        """Build ``L = L_mec(mechanical part) - U(thermodynamic part)``.

        The energy is ``E_mec + U`` with ``E_mec`` the energy of ``L_mec``.
        """
        m = mech_dim

        def lagrangian(q, qdot):
            return l_mec(q[:m], qdot[:m]) - internal_energy(q[m:])

        if mech_energy is None:
            mech_energy = lambda qm, vm: lagrangian_energy(l_mec, qm, vm)

        def energy(q, qdot):
            return mech_energy(q[:m], qdot[:m]) + internal_energy(q[m:])

        return cls(n=n, mech_dim=m, lagrangian=lagrangian, ck=ck, cv=cv, energy=energy,
                   l_mec=l_mec, internal_energy=internal_energy, **kwargs)

    def index(self, name: str) -> int:
        return self.coordinate_names.index(name)

    def split_residual(self, q, qdot) -> float:
        """``|L - (L_mec - U)|`` at a point; zero when the Lagrangian splits."""
        if self.l_mec is None or self.internal_energy is None:
            raise ThermomechError("system was not given L_mec and U")
        q = np.asarray(q, float)
        qdot = np.asarray(qdot, float)
        m = self.mech_dim
        split = self.l_mec(q[:m], qdot[:m]) - self.internal_energy(q[m:])
        return abs(float(self.lagrangian(q, qdot)) - float(split))


@dataclass(frozen=True)
class VariationBasis:
    columns: np.ndarray

    @property
    def r(self) -> int:
        return self.columns.shape[1]


def lagrangian_energy(lagrangian, q, qdot) -> float:
    q = np.asarray(q, float)
    qdot = np.asarray(qdot, float)
    p = _velocity_gradient(lagrangian, q, qdot)
    return float(p @ qdot - lagrangian(q, qdot))


def _check_jet(sys: SOCSystem, jet: Jet2) -> None:
    if jet.n != sys.n:
        raise DimensionError(f"jet has dimension {jet.n}, system has {sys.n}")


def kinematic_residual(sys: SOCSystem, jet: Jet2) -> np.ndarray:
    _check_jet(sys, jet)
    return np.atleast_1d(np.asarray(sys.ck.w(jet), dtype=float))


def nullspace(A: np.ndarray, pivot_tol: float = DEFAULT_PIVOT_TOL) -> tuple[np.ndarray, int]:
    """Orthonormal nullspace basis of ``A`` and the rank of ``A``.

    Rows are normalized, then reduced by Gaussian elimination with row
    pivoting; a pivot is accepted when it exceeds ``pivot_tol`` (rows have
    unit norm, so this is relative to the largest row norm). Free columns
    give the nullspace vectors, which are orthonormalized by QR.
    """
    A = np.array(A, dtype=float, ndmin=2)
    n = A.shape[1]
    norms = np.linalg.norm(A, axis=1)
    R = A[norms > 0] / norms[norms > 0, None] if A.shape[0] else np.zeros((0, n))
    rows = R.shape[0]
    pivots: list[int] = []
    r = 0
    for col in range(n):
        if r == rows:
            break
        k = r + int(np.argmax(np.abs(R[r:, col])))
        if abs(R[k, col]) <= pivot_tol:
            R[r:, col] = 0.0
            continue
        R[[r, k]] = R[[k, r]]
        R[r] /= R[r, col]
        others = np.arange(rows) != r
        R[others] -= np.outer(R[others, col], R[r])
        pivots.append(col)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    N = np.zeros((n, len(free)))
    for j, c in enumerate(free):
        N[c, j] = 1.0
        for i, pc in enumerate(pivots):
            N[pc, j] = -R[i, c]
    if free:
        N, _ = np.linalg.qr(N)
    return N, len(pivots)


def variation_basis(sys: SOCSystem, q, qdot) -> VariationBasis:
    q = np.asarray(q, float)
    qdot = np.asarray(qdot, float)
    V = np.array(sys.cv.vmat(q, qdot), dtype=float, ndmin=2).reshape(-1, sys.n)
    N, _ = nullspace(V, sys.pivot_tol)
    return VariationBasis(N)


def _velocity_gradient(lagrangian, q, qdot) -> np.ndarray:
    n = q.shape[0]
    grad = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        grad[i] = directional(lambda v: lagrangian(q, v), qdot, e, scale=max(1.0, abs(qdot[i])))
    return grad


def _position_gradient(lagrangian, q, qdot) -> np.ndarray:
    n = q.shape[0]
    grad = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        grad[i] = directional(lambda x: lagrangian(x, qdot), q, e, scale=max(1.0, abs(q[i])))
    return grad


def el_residual(sys: SOCSystem, jet: Jet2) -> np.ndarray:
    """``d/dt(dL/dqdot) - dL/dq`` at a jet, by central differences of ``L``.

    The time derivative is the directional derivative of ``dL/dqdot`` along
    ``(qdot, qddot)``, i.e. the chain rule with the jet's acceleration.
    """
    _check_jet(sys, jet)
    L = sys.lagrangian
    n = sys.n

    def checked(q, v):
        value = float(L(q, v))
        if not np.isfinite(value):
            raise ThermomechError(f"non-finite Lagrangian at q={q.tolist()}, qdot={v.tolist()}")
        return value

    def momentum(z):
        return _velocity_gradient(checked, z[:n], z[n:])

    z = np.concatenate([jet.q, jet.qdot])
    dz = np.concatenate([jet.qdot, jet.qddot])
    dp_dt = directional(momentum, z, dz)
    return dp_dt - _position_gradient(checked, jet.q, jet.qdot)


def dalembert_violation(sys: SOCSystem, jet: Jet2) -> float:
    """Largest ``|<R, dq>|`` over unit admissible variations ``dq``.

    Equals the norm of the projection of the Euler-Lagrange residual onto
    the admissible subspace, hence independent of the basis chosen. Zero
    when no variation is admissible.
    """
    basis = variation_basis(sys, jet.q, jet.qdot)
    if basis.r == 0:
        return 0.0
    R = el_residual(sys, jet)
    return float(np.linalg.norm(basis.columns.T @ R))


def constraint_force(sys: SOCSystem, jet: Jet2, tol: float = 1e-8) -> np.ndarray:
    """Coefficients ``lam`` with ``R = sum_b lam_b * vmat[b]`` (least squares).

    Raises :class:`InconsistentJetError` if the residual of the fit exceeds
    ``tol * max(1, |R|)``, i.e. ``R`` is not a constraint force.
    """
    R = el_residual(sys, jet)
    V = np.array(sys.cv.vmat(jet.q, jet.qdot), dtype=float, ndmin=2).reshape(-1, sys.n)
    if V.shape[0] == 0:
        lam = np.zeros(0)
        fit = float(np.linalg.norm(R))
    else:
        lam, *_ = np.linalg.lstsq(V.T, R, rcond=None)
        fit = float(np.linalg.norm(V.T @ lam - R))
    if fit > tol * max(1.0, float(np.linalg.norm(R))):
        raise InconsistentJetError(f"Euler-Lagrange residual is not a constraint force "
                                   f"(fit residual {fit:.3e})", fit)
    return lam


def force_map_mismatch(sys: SOCSystem, q, qdot) -> float:
    """Largest ``|<F, dq>|`` over the orthonormal variation basis.

    Zero when every admissible variation is annihilated by the force map.
    """
    if sys.force_map is None:
        raise ThermomechError("system has no force map")
    basis = variation_basis(sys, q, qdot)
    if basis.r == 0:
        return 0.0
    F = np.asarray(sys.force_map(np.asarray(q, float), np.asarray(qdot, float)), dtype=float)
    return float(np.max(np.abs(F @ basis.columns)))


def solve_acceleration(sys: SOCSystem, q, qdot, newton_steps: int = 3) -> np.ndarray:
    """Acceleration making the jet satisfy both trajectory conditions.

    Solves ``[w(jet); B^T R(jet)] = 0`` for ``qddot`` in the least-squares
    sense (Gauss-Newton with a finite-difference Jacobian; one step is exact
    when both residuals are affine in ``qddot``). Rows of ``w`` that do not
    involve ``qddot`` cannot be corrected and are left as they are.
    """
    q = np.asarray(q, float)
    qdot = np.asarray(qdot, float)
    basis = variation_basis(sys, q, qdot).columns

    def residual(a):
        jet = Jet2(q, qdot, a)
        parts = [kinematic_residual(sys, jet)]
        if basis.shape[1]:
            parts.append(basis.T @ el_residual(sys, jet))
        return np.concatenate(parts)

    a = np.zeros(sys.n)
    for _ in range(newton_steps):
        r0 = residual(a)
        J = np.empty((r0.size, sys.n))
        for i in range(sys.n):
            e = np.zeros(sys.n)
            e[i] = 1.0
            J[:, i] = directional(residual, a, e)
        step, *_ = np.linalg.lstsq(J, -r0, rcond=None)
        a = a + step
        if np.max(np.abs(step)) <= 1e-13 * max(1.0, float(np.max(np.abs(a)))):
            break
    return a


def socs_ode(sys: SOCSystem, guards=()) -> ReducedODE:
    """First-order system on ``(q, qdot)`` driven by :func:`solve_acceleration`."""
    n = sys.n
    names = sys.coordinate_names or tuple(f"q{i}" for i in range(n))

    def rhs(t, s):
        return np.concatenate([s[n:], solve_acceleration(sys, s[:n], s[n:])])

    return ReducedODE(2 * n, rhs, tuple(names) + tuple(f"{c}_dot" for c in names),
                      tuple(guards), tuple(range(n, 2 * n)))


# -- embeddings ----------------------------------------------------------------

def nonholonomic_embed(L, dist_rows, n: int, coordinate_names: tuple[str, ...] = ()) -> SOCSystem:
    """SOCS of a nonholonomic system with distribution ``{v : A(q) v = 0}``.

    ``C_K`` holds ``A qdot = 0`` and its time derivative; admissible
    variations are the distribution itself; no heat exchange.
    """

    def rows(q):
        return np.array(dist_rows(q), dtype=float, ndmin=2).reshape(-1, n)

    def w(jet):
        A = rows(jet.q)
        if A.shape[0] == 0:
            return np.zeros(0)
        velocity = A @ jet.qdot
        drift = directional(lambda x: rows(x) @ jet.qdot, jet.q, jet.qdot)
        return np.concatenate([velocity, A @ jet.qddot + drift])

    return SOCSystem(n=n, mech_dim=n, lagrangian=L, ck=KinematicConstraints(w),
                     cv=VariationalConstraints(lambda q, qdot: rows(q)),
                     coordinate_names=tuple(coordinate_names))


def _jacobian(f, q) -> np.ndarray:
    q = np.asarray(q, float)
    cols = []
    for i in range(q.size):
        e = np.zeros(q.size)
        e[i] = 1.0
        cols.append(np.atleast_1d(directional(f, q, e, scale=max(1.0, abs(q[i])))))
    return np.column_stack(cols)


def holonomic_embed(L, submanifold_eqs, n: int, coordinate_names: tuple[str, ...] = (),
                    pivot_tol: float = DEFAULT_PIVOT_TOL) -> SOCSystem:
    """SOCS of the Lagrangian system restricted to ``{q : phi(q) = 0}``.

    ``C_K`` holds ``phi``, its first and its second time derivative;
    admissible variations are tangent to the level set. The Jacobian of
    ``phi`` must have full row rank wherever it is queried.
    """

    def phi(q):
        return np.atleast_1d(np.asarray(submanifold_eqs(q), dtype=float))

    def jac(q):
        J = _jacobian(phi, q)
        _, rank = nullspace(J, pivot_tol)
        if rank < J.shape[0]:
            raise ConstraintRankError(f"constraint Jacobian has rank {rank} < {J.shape[0]} "
                                      f"at q={np.asarray(q).tolist()}")
        return J

    def w(jet):
        J = jac(jet.q)
        curvature = np.atleast_1d(second_directional(phi, jet.q, jet.qdot))
        return np.concatenate([phi(jet.q), J @ jet.qdot, J @ jet.qddot + curvature])

    return SOCSystem(n=n, mech_dim=n, lagrangian=L, ck=KinematicConstraints(w),
                     cv=VariationalConstraints(lambda q, qdot: jac(q)),
                     coordinate_names=tuple(coordinate_names), pivot_tol=pivot_tol)
