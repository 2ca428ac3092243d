"""Discrete operators on the necklace lattice.

P1 finite elements with a lumped (diagonal) mass matrix.  The Kirchhoff flux
balance enters as a natural boundary condition of the weak form, so the
assembled stiffness matrix K is exactly symmetric and positive semidefinite
and constants lie in its kernel.

In the lumped inner product <u, v> = sum w_i u_i v_i the operator
-d^2/dx^2 (with Kirchhoff conditions) is M^{-1} K, and
B^2 = (I + A^2)^{-1} A^2 is applied as I - (I + A^2)^{-1}, i.e. one solve
with the fixed SPD matrix M + K.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .lattice import GraphField, NecklaceLattice, require_same_lattice

#: relative residual accepted from a Helmholtz solve
SOLVE_TOL = 1e-12


class SolverError(RuntimeError):
    """Raised when a linear solve does not meet the residual contract."""


def assemble_stiffness(lat: NecklaceLattice, phases: np.ndarray | None = None) -> sp.csr_matrix:
    """Assemble the weak-form Laplacian K from per-segment two-point stencils.

    ``phases`` optionally attaches a complex phase factor per segment (used by
    the quasi-periodic one-cell Bloch problem); without it K is real symmetric.
    """
    n = lat.n_dof
    g = lat.seg_w / lat.h                      # per-segment conductance
    if phases is None:
        off = -g
        dtype = float
    else:
        off = -g * phases
        dtype = complex
    rows = np.concatenate([lat.seg_i, lat.seg_j, lat.seg_i, lat.seg_j])
    cols = np.concatenate([lat.seg_i, lat.seg_j, lat.seg_j, lat.seg_i])
    vals = np.concatenate([g, g, off, np.conj(off)]).astype(dtype)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


@dataclass
class DiscreteOperators:
    lattice: NecklaceLattice
    stiffness: sp.csr_matrix
    mass: np.ndarray                            # diagonal of M
    _helmholtz: spla.SuperLU

    def check(self, u: GraphField) -> np.ndarray:
        if u.lattice.n_dof != self.lattice.n_dof or u.lattice.mode != self.lattice.mode:
            raise ValueError("field lattice does not match operator lattice")
        return u.values


def assemble_operators(lat: NecklaceLattice) -> DiscreteOperators:
    K = assemble_stiffness(lat)
    M = lat.weights
    helm = spla.splu((sp.diags(M) + K).tocsc())
    return DiscreteOperators(lattice=lat, stiffness=K, mass=M, _helmholtz=helm)


def apply_a2(ops: DiscreteOperators, u: GraphField) -> GraphField:
    """Discrete -d^2/dx^2 in the lumped inner product: M^{-1} K u."""
    x = ops.check(u)
    return GraphField(u.lattice, (ops.stiffness @ x) / ops.mass)


def helmholtz_solve(ops: DiscreteOperators, f: GraphField) -> GraphField:
    """Solve (M + K) u = M f, i.e. u = (I + A^2)^{-1} f."""
    x = ops.check(f)
    rhs = ops.mass * x
    if np.iscomplexobj(rhs):
        u = ops._helmholtz.solve(rhs.real) + 1j * ops._helmholtz.solve(rhs.imag)
    else:
        u = ops._helmholtz.solve(rhs)
    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm > 0.0:
        res = np.linalg.norm(ops.mass * u + ops.stiffness @ u - rhs) / rhs_norm
        if res > SOLVE_TOL:
            raise SolverError(f"Helmholtz solve residual {res:.3e} exceeds {SOLVE_TOL:.1e}")
    return GraphField(f.lattice, u)


def apply_b2(ops: DiscreteOperators, u: GraphField) -> GraphField:
    """B^2 u = (I + A^2)^{-1} A^2 u, applied as u - (I + A^2)^{-1} u."""
    return GraphField(u.lattice, u.values - helmholtz_solve(ops, u).values)


def inner_product(u: GraphField, v: GraphField) -> complex | float:
    lat = require_same_lattice(u, v)
    s = np.sum(lat.weights * np.conj(u.values) * v.values)
    return s if np.iscomplexobj(s) else float(s)


def l2_norm(u: GraphField) -> float:
    return float(np.sqrt(np.sum(u.lattice.weights * np.abs(u.values) ** 2)))


def h1_seminorm(ops: DiscreteOperators, u: GraphField) -> float:
    """sqrt(<A^2 u, u>) = discrete L^2 norm of the derivative."""
    x = ops.check(u)
    q = np.real(np.vdot(x, ops.stiffness @ x))
    return float(np.sqrt(max(q, 0.0)))


def sup_norm(u: GraphField) -> float:
    return float(np.max(np.abs(u.values)))
