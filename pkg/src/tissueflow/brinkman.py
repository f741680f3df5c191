"""Screened vector Helmholtz (Brinkman) solves -beta*Lap(v) + v = -grad p.

The two velocity components decouple, so each is an independent SPD
system on its own face grid with homogeneous Dirichlet walls.  The
gradient-form variant instead solves the scalar screened-Poisson
problem -beta*Lap(K) + K = p with zero-flux walls and returns -grad K,
which is curl-free up to discretization error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import GridSpec, ScalarField, VectorField, gradient
from .operators import (cell_laplacian_neumann, face_stiffness_u,
                        face_stiffness_v)


class SolverFailure(RuntimeError):
    """Linear solve did not reach the requested tolerance."""

    def __init__(self, what: str, residual: float, tol: float, iterations: int):
        super().__init__(f"{what}: residual {residual:.3e} > tol {tol:.3e} "
                         f"after {iterations} iterations")
        self.residual = residual
        self.tol = tol
        self.iterations = iterations


@dataclass(frozen=True)
class SolverConfig:
    rel_tol: float = 1e-10
    max_iter: int | None = None   # defaults to 10*(nx+ny)
    method: str = "cg"            # "cg" | "direct"

    def __post_init__(self):
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")
        if self.method not in ("cg", "direct"):
            raise ValueError(f"unknown solver method {self.method!r}")

    def iterations_for(self, spec: GridSpec) -> int:
        return self.max_iter if self.max_iter is not None else 10 * (spec.nx + spec.ny)


def _solve_spd(A: sp.csr_matrix, b: np.ndarray, cfg: SolverConfig,
               spec: GridSpec, what: str) -> np.ndarray:
    scale = np.linalg.norm(b)
    if scale == 0.0:
        return np.zeros_like(b)
    if cfg.method == "direct":
        x = spla.splu(A.tocsc()).solve(b)
        iters = 0
    else:
        M = sp.diags(1.0 / A.diagonal())
        x, info = spla.cg(A, b, rtol=cfg.rel_tol * 0.1, atol=0.0,
                          maxiter=cfg.iterations_for(spec), M=M)
        iters = cfg.iterations_for(spec) if info > 0 else info
    res = np.linalg.norm(A @ x - b)
    if res > cfg.rel_tol * scale:
        raise SolverFailure(what, res / scale, cfg.rel_tol, iters)
    return x


class HelmholtzOperator:
    """Assembled I + beta*K per velocity component; factorization cached."""

    def __init__(self, spec: GridSpec, beta: float):
        if beta <= 0:
            raise ValueError("beta must be positive")
        self.spec = spec
        self.beta = beta
        self.Ku = face_stiffness_u(spec)
        self.Kv = face_stiffness_v(spec)
        self.Au = (sp.identity(self.Ku.shape[0]) + beta * self.Ku).tocsr()
        self.Av = (sp.identity(self.Kv.shape[0]) + beta * self.Kv).tocsr()
        self._lu_u = None
        self._lu_v = None

    def _direct(self, A, which):
        lu = self._lu_u if which == "u" else self._lu_v
        if lu is None:
            lu = spla.splu(A.tocsc())
            if which == "u":
                self._lu_u = lu
            else:
                self._lu_v = lu
        return lu

    def solve_component(self, which: str, b: np.ndarray, cfg: SolverConfig) -> np.ndarray:
        A = self.Au if which == "u" else self.Av
        scale = np.linalg.norm(b)
        if scale == 0.0:
            return np.zeros_like(b)
        if cfg.method == "direct":
            x = self._direct(A, which).solve(b)
            iters = 0
        else:
            M = sp.diags(1.0 / A.diagonal())
            x, info = spla.cg(A, b, rtol=cfg.rel_tol * 0.1, atol=0.0,
                              maxiter=cfg.iterations_for(self.spec), M=M)
            iters = cfg.iterations_for(self.spec) if info > 0 else info
        res = np.linalg.norm(A @ x - b)
        if res > cfg.rel_tol * scale:
            raise SolverFailure(f"brinkman {which}-component", res / scale,
                                cfg.rel_tol, iters)
        return x

    def solve_rhs(self, f: VectorField, cfg: SolverConfig | None = None) -> VectorField:
        """Solve -beta*Lap(v) + v = f; boundary faces of f are ignored."""
        cfg = cfg or SolverConfig()
        spec = self.spec
        bu = f.u[1:-1, :].ravel()
        bv = f.v[:, 1:-1].ravel()
        xu = self.solve_component("u", bu, cfg)
        xv = self.solve_component("v", bv, cfg)
        u = np.zeros((spec.nx + 1, spec.ny))
        v = np.zeros((spec.nx, spec.ny + 1))
        u[1:-1, :] = xu.reshape(spec.nx - 1, spec.ny)
        v[:, 1:-1] = xv.reshape(spec.nx, spec.ny - 1)
        return VectorField(spec, u, v)

    def solve_pressure(self, p: ScalarField, cfg: SolverConfig | None = None) -> VectorField:
        g = gradient(p)
        return self.solve_rhs(VectorField(p.spec, -g.u, -g.v), cfg)


def solve_brinkman(p: ScalarField, beta: float,
                   cfg: SolverConfig | None = None) -> VectorField:
    """Dirichlet Brinkman velocity from a cell-centered pressure."""
    return HelmholtzOperator(p.spec, beta).solve_pressure(p, cfg)


def solve_brinkman_rhs(f: VectorField, beta: float,
                       cfg: SolverConfig | None = None) -> VectorField:
    """Manufactured-solution entry point: arbitrary face RHS."""
    return HelmholtzOperator(f.spec, beta).solve_rhs(f, cfg)


def solve_screened_potential(p: ScalarField, beta: float,
                             cfg: SolverConfig | None = None) -> ScalarField:
    """Scalar -beta*Lap(K) + K = p with zero-flux walls."""
    cfg = cfg or SolverConfig()
    spec = p.spec
    A = (sp.identity(spec.nx * spec.ny) + beta * cell_laplacian_neumann(spec)).tocsr()
    x = _solve_spd(A, p.values.ravel(), cfg, spec, "screened potential")
    return ScalarField(spec, x.reshape(spec.nx, spec.ny))


def solve_brinkman_gradient_form(p: ScalarField, beta: float,
                                 cfg: SolverConfig | None = None) -> VectorField:
    """Gradient-form velocity v = -grad K; laminar (curl-free) by construction."""
    K = solve_screened_potential(p, beta, cfg)
    g = gradient(K)
    return VectorField(p.spec, -g.u, -g.v)
