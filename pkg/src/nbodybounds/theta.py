"""Lovász theta by a small dense primal-dual interior-point method.

Primal:  maximise <J, X>  s.t.  tr X = 1,  X_uv = 0 on edges,  X psd.
Dual:    minimise t       s.t.  Z = t I + sum_e y_e E_e - J  psd,
where ``E_e = e_u e_v^T + e_v e_u^T``. Constraint 0 is the trace, constraint
``k >= 1`` is edge ``k - 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .graph import ExclusivityGraph, complement, is_vertex_transitive

MAX_VERTICES = 256
IPM_MAX_VERTICES = 128
MIN_TOL = 1e-8


@dataclass
class ThetaResult:
    value: float
    primal_feasibility: float
    duality_gap: float
    iterations: int
    lower: float
    upper: float
    method: str = "ipm"

    def to_json(self) -> dict:
        return {"value": self.value, "primal_feasibility": self.primal_feasibility,
                "duality_gap": self.duality_gap, "iterations": self.iterations,
                "lower": self.lower, "upper": self.upper, "method": self.method}


class ThetaNotConverged(RuntimeError):
    def __init__(self, result: ThetaResult):
        super().__init__(f"theta solver stopped after {result.iterations} iterations "
                         f"with bounds [{result.lower:.9g}, {result.upper:.9g}]")
        self.result = result


def odd_cycle_theta(m: int) -> float:
    """Closed form for the cycle C_m, m odd."""
    c = math.cos(math.pi / m)
    return m * c / (1 + c)


def _max_step(M: np.ndarray, dM: np.ndarray) -> float:
    """Largest a <= 1 keeping ``M + a dM`` psd (M positive definite)."""
    L = np.linalg.cholesky(M)
    Li = sla.solve_triangular(L, np.eye(len(M)), lower=True)
    lam = np.linalg.eigvalsh(Li @ dM @ Li.T)[0]
    return 1.0 if lam >= 0 else min(1.0, -1.0 / lam)


class _ThetaSDP:
    def __init__(self, adj: np.ndarray):
        self.m = len(adj)
        iu, iv = np.nonzero(np.triu(adj, 1))
        self.eu, self.ev = iu, iv
        self.b = np.zeros(1 + len(iu))
        self.b[0] = 1.0
        self.C = np.ones((self.m, self.m))

    def A(self, K: np.ndarray) -> np.ndarray:
        out = np.empty(1 + len(self.eu))
        out[0] = np.trace(K)
        out[1:] = K[self.eu, self.ev] + K[self.ev, self.eu]
        return out

    def AT(self, y: np.ndarray) -> np.ndarray:
        S = y[0] * np.eye(self.m)
        S[self.eu, self.ev] += y[1:]
        S[self.ev, self.eu] += y[1:]
        return S

    def schur(self, X: np.ndarray, W: np.ndarray) -> np.ndarray:
        eu, ev = self.eu, self.ev
        k = len(eu)
        M = np.empty((1 + k, 1 + k))
        M[0, 0] = np.sum(X * W)
        XW = X @ W
        M[0, 1:] = M[1:, 0] = XW[ev, eu] + XW[eu, ev]
        M[1:, 1:] = (X[np.ix_(ev, eu)] * W[np.ix_(eu, ev)]
                     + X[np.ix_(ev, ev)] * W[np.ix_(eu, eu)]
                     + X[np.ix_(eu, eu)] * W[np.ix_(ev, ev)]
                     + X[np.ix_(eu, ev)] * W[np.ix_(ev, eu)])
        return M


def _solve_ipm(adj: np.ndarray, tol: float, max_iter: int) -> ThetaResult:
    sdp = _ThetaSDP(adj)
    m = sdp.m
    X = np.eye(m) / m
    y = np.zeros(len(sdp.b))
    y[0] = m + 1.0
    Z = sdp.AT(y) - sdp.C
    result = None
    for it in range(1, max_iter + 1):
        rp = sdp.b - sdp.A(X)
        Rd = sdp.AT(y) - Z - sdp.C
        pobj, dobj = float(np.sum(sdp.C * X)), float(sdp.b @ y)
        gap = abs(dobj - pobj) / (1 + abs(pobj) + abs(dobj))
        pres = float(np.linalg.norm(rp))
        dres = float(np.linalg.norm(Rd))
        result = ThetaResult(0.5 * (pobj + dobj), pres, gap, it - 1, pobj, dobj)
        if gap <= tol and pres <= tol * m and dres <= tol * m:
            return result

        mu = np.sum(X * Z) / m
        W = np.linalg.inv(Z)
        W = 0.5 * (W + W.T)
        M = sdp.schur(X, W)
        try:
            factor = sla.cho_factor(M)
            solve = lambda r: sla.cho_solve(factor, r)  # noqa: E731
        except np.linalg.LinAlgError:
            solve = lambda r: np.linalg.lstsq(M, r, rcond=None)[0]  # noqa: E731
        XRdW = sdp.A(X @ Rd @ W)

        def direction(sigma, corr):
            K = (sigma * mu * np.eye(m) - X @ Z - corr) @ W
            dy = solve(sdp.A(K) - rp - XRdW)
            dZ = sdp.AT(dy) + Rd
            dX = K - X @ dZ @ W
            return 0.5 * (dX + dX.T), dy, dZ

        dXa, dya, dZa = direction(0.0, 0.0)
        ap, ad = _max_step(X, dXa), _max_step(Z, dZa)
        mu_aff = np.sum((X + ap * dXa) * (Z + ad * dZa)) / m
        sigma = (mu_aff / mu) ** 3
        dX, dy, dZ = direction(sigma, dXa @ dZa)
        ap = min(1.0, 0.98 * _max_step(X, dX))
        ad = min(1.0, 0.98 * _max_step(Z, dZ))
        X = X + ap * dX
        X = 0.5 * (X + X.T)
        y = y + ad * dy
        Z = Z + ad * dZ
        Z = 0.5 * (Z + Z.T)
    raise ThetaNotConverged(result)


def _solve_admm(adj: np.ndarray, tol: float, max_iter: int, rho: float = 1.0) -> ThetaResult:
    """Alternate between the affine set {tr X = 1, X_E = 0} and the psd cone."""
    m = len(adj)
    J = np.ones((m, m))
    edges = np.asarray(adj, dtype=bool)
    Y = np.eye(m) / m
    U = np.zeros((m, m))
    best = None
    for it in range(1, max_iter + 1):
        X = Y - U + J / rho
        X[edges] = 0.0
        X[np.diag_indices(m)] += (1.0 - np.trace(X)) / m
        lam, V = np.linalg.eigh(X + U)
        Y = (V * np.clip(lam, 0, None)) @ V.T
        U = U + X - Y
        if it % 25 and it != max_iter:
            continue
        # primal estimate; Y may still carry small edge entries
        lower = float(np.sum(Y)) / max(np.trace(Y), 1e-300)
        # J with edge entries traded for the scaled multiplier: a valid dual point
        upper = float(np.linalg.eigvalsh(np.where(edges, rho * U, J))[-1])
        resid = float(np.linalg.norm(X - Y))
        gap = abs(upper - lower) / (1 + abs(lower) + abs(upper))
        best = ThetaResult(0.5 * (lower + upper), resid, gap, it, lower, float(upper), "admm")
        if gap <= tol and resid <= tol * m:
            return best
    raise ThetaNotConverged(best)


def lovasz_theta(g: ExclusivityGraph, tol: float = 1e-8, method: str = "auto",
                 max_iter: int | None = None) -> ThetaResult:
    """Lovász number of ``g`` to relative duality gap ``tol``."""
    m = len(g)
    if m == 0:
        raise ValueError("theta of the empty vertex set is undefined")
    if m > MAX_VERTICES:
        raise ValueError(f"graph has {m} vertices; limit is {MAX_VERTICES}")
    if tol < MIN_TOL:
        raise ValueError(f"tolerance must be >= {MIN_TOL}")
    if method == "auto":
        method = "ipm" if m <= IPM_MAX_VERTICES else "admm"
    if method == "ipm":
        return _solve_ipm(g.adjacency, tol, max_iter or 200)
    if method == "admm":
        return _solve_admm(g.adjacency, tol, max_iter or 200_000)
    raise ValueError(f"unknown method {method!r}")


@dataclass
class IdentityReport:
    theta: float
    theta_complement: float
    vertices: int
    ratio: float
    ok: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def product_identity_check(g: ExclusivityGraph, tol: float = 1e-3,
                           solver_tol: float = 1e-8) -> IdentityReport:
    """theta(G) * theta(complement G) / |V|, which is 1 for vertex-transitive G."""
    if not is_vertex_transitive(g):
        raise ValueError("product identity needs a vertex-transitive graph")
    t = lovasz_theta(g, solver_tol).value
    tc = lovasz_theta(complement(g), solver_tol).value
    ratio = t * tc / len(g)
    return IdentityReport(t, tc, len(g), ratio, abs(ratio - 1) <= tol)
