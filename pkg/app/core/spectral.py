"""Direction-incentivised spectral solvers.

The objective over x in R^n is

    Q_c(x) = sum_{(u,v) in E} (x_u - x_v)^2 - c * (d @ x)^2

with d the out-minus-in degree vector. solve_fiedler minimises Q_c on the
unit sphere orthogonal to the all-ones vector. solve_restricted pins a set
K to +1/sqrt(n) and a set M to -1/sqrt(n) and minimises over the rest,
keeping ||x|| = 1 with the free block centred.
"""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.optimize import brentq
from scipy.sparse.linalg import LinearOperator, lobpcg

from app.core.errors import SolverError
from app.core.graph import DiGraph, degree_difference_vector, is_weakly_connected
from app.models.schemas import SpectralConfig

logger = logging.getLogger(__name__)

KRYLOV_DIM = 48
LOBPCG_BLOCK = 2


@dataclass(frozen=True, eq=False)
class SpectralSolution:
    x: np.ndarray
    value: float
    converged: bool = True
    iterations: int = 0
    method: str = "dense"


@dataclass(frozen=True, eq=False)
class Restriction:
    """Vertices pinned high (K) and low (M) for a restricted solve."""

    K: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    M: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @classmethod
    def of(cls, K, M) -> "Restriction":
        return cls(K=np.asarray(list(K), dtype=np.int64), M=np.asarray(list(M), dtype=np.int64))


# --- Operator ---

def resolve_coefficient(g: DiGraph, cfg: SpectralConfig) -> float:
    """The direction coefficient c actually used on g."""
    m = g.num_edges
    if cfg.c is None:
        return 0.0 if m == 0 else 1.0 / (2.0 * m)
    if m and cfg.c * m > 1.0 + 1e-12:
        raise SolverError(f"c={cfg.c} exceeds 1/|E|={1.0 / m:.6g}; the operator is no longer positive semidefinite")
    if m and abs(cfg.c * m - 1.0) <= 1e-12:
        logger.warning("c = 1/|E| makes the objective degenerate; solutions may be non-unique")
    return float(cfg.c)


def laplacian_form(g: DiGraph, x: np.ndarray) -> float:
    diffs = x[g.src] - x[g.dst]
    return float(diffs @ diffs)


def quadratic_form(g: DiGraph, x: np.ndarray, c: float) -> float:
    x = _check_vector(g, x)
    d = degree_difference_vector(g)
    return laplacian_form(g, x) - c * float(d @ x) ** 2


def apply_operator(g: DiGraph, x: np.ndarray, c: float) -> np.ndarray:
    """Gradient of Q_c at x, i.e. 2 (L - c d d^T) x."""
    x = _check_vector(g, x)
    return 2.0 * _operator_vec(g, x, c, degree_difference_vector(g))


def operator_matrix(g: DiGraph, c: float) -> np.ndarray:
    """Dense L - c d d^T, with L the Laplacian of the undirected multigraph."""
    n = g.n
    mat = np.zeros((n, n))
    np.add.at(mat, (g.src, g.src), 1.0)
    np.add.at(mat, (g.dst, g.dst), 1.0)
    np.add.at(mat, (g.src, g.dst), -1.0)
    np.add.at(mat, (g.dst, g.src), -1.0)
    d = degree_difference_vector(g)
    return mat - c * np.outer(d, d)


def _check_vector(g: DiGraph, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (g.n,):
        raise SolverError(f"vector of shape {x.shape} does not match a graph on {g.n} vertices")
    return x


def _operator_vec(g: DiGraph, x: np.ndarray, c: float, d: np.ndarray) -> np.ndarray:
    diffs = x[g.src] - x[g.dst]
    out = np.bincount(g.src, weights=diffs, minlength=g.n) - np.bincount(g.dst, weights=diffs, minlength=g.n)
    return out - c * d * float(d @ x)


def _operator_block(g: DiGraph, block: np.ndarray, c: float, d: np.ndarray) -> np.ndarray:
    block = np.asarray(block, dtype=np.float64)
    if block.ndim == 1:
        return _operator_vec(g, block, c, d)
    return np.column_stack([_operator_vec(g, block[:, j], c, d) for j in range(block.shape[1])])


# --- Unrestricted solve ---

def solve_fiedler(g: DiGraph, cfg: SpectralConfig | None = None) -> SpectralSolution:
    """Unit minimiser of Q_c orthogonal to 1, oriented so that d @ x >= 0."""
    cfg = cfg or SpectralConfig()
    if g.n < 2:
        raise SolverError("the spectral solver needs at least two vertices")
    if not is_weakly_connected(g):
        raise SolverError("graph is not weakly connected")
    return _solve_free(g, cfg, resolve_coefficient(g, cfg))


def _solve_free(g: DiGraph, cfg: SpectralConfig, c: float) -> SpectralSolution:
    if g.n <= max(cfg.small_threshold, 5 * (LOBPCG_BLOCK + 1)):
        x = _dense_fiedler(g, c)
        converged, iterations, method = True, 0, "dense"
    else:
        x, converged, iterations = _lobpcg_fiedler(g, cfg, c)
        method = "lobpcg"
    x = _orient(g, x)
    return SpectralSolution(
        x=x,
        value=quadratic_form(g, x, c),
        converged=converged,
        iterations=iterations,
        method=method,
    )


def _dense_fiedler(g: DiGraph, c: float) -> np.ndarray:
    basis = linalg.null_space(np.ones((1, g.n)))
    reduced = basis.T @ operator_matrix(g, c) @ basis
    _, vecs = linalg.eigh((reduced + reduced.T) / 2.0)
    x = basis @ vecs[:, 0]
    x -= x.mean()
    return x / np.linalg.norm(x)


def _lobpcg_fiedler(g: DiGraph, cfg: SpectralConfig, c: float) -> tuple[np.ndarray, bool, int]:
    n = g.n
    d = degree_difference_vector(g)
    degree = (g.out_deg + g.in_deg).astype(np.float64)
    scale = 2.0 * max(float(degree.max()), 1.0) + c * float(d @ d)

    op = LinearOperator(
        (n, n),
        matvec=lambda v: _operator_block(g, np.ravel(v), c, d),
        matmat=lambda b: _operator_block(g, b, c, d),
        dtype=np.float64,
    )
    inv_degree = 1.0 / np.maximum(degree, 1.0)
    precond = LinearOperator(
        (n, n),
        matvec=lambda v: np.ravel(v) * inv_degree,
        matmat=lambda b: b * inv_degree[:, None],
        dtype=np.float64,
    )
    rng = np.random.default_rng(cfg.seed)
    start = rng.standard_normal((n, LOBPCG_BLOCK))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        vals, vecs, history = lobpcg(
            op,
            start,
            M=precond,
            Y=np.ones((n, 1)),
            tol=cfg.tol * scale,
            maxiter=cfg.max_iter,
            largest=False,
            retResidualNormsHistory=True,
        )
    x = np.asarray(vecs[:, int(np.argmin(vals))], dtype=np.float64)
    x = x - x.mean()
    x /= np.linalg.norm(x)
    ax = _operator_vec(g, x, c, d)
    residual = float(np.linalg.norm(ax - float(x @ ax) * x))
    converged = residual <= cfg.tol * scale * 10.0
    if not converged:
        logger.warning(
            "LOBPCG stopped after %s iterations with residual %.3e (target %.3e); using best iterate",
            len(history),
            residual,
            cfg.tol * scale,
        )
    return x, converged, len(history)


def _orient(g: DiGraph, x: np.ndarray) -> np.ndarray:
    d = degree_difference_vector(g)
    s = float(d @ x)
    eps = 1e-12 * max(float(np.linalg.norm(d)), 1.0)
    if s < -eps:
        return -x
    if abs(s) <= eps and x[int(np.argmax(np.abs(x)))] < 0:
        return -x
    return x


# --- Restricted solve ---

@dataclass(eq=False)
class _LocalProblem:
    """Q_c restricted to the free block L: z^T A z + 2 b^T z + const."""

    size: int
    src: np.ndarray
    dst: np.ndarray
    boundary_deg: np.ndarray
    d: np.ndarray
    b: np.ndarray
    c: float

    def apply(self, z: np.ndarray) -> np.ndarray:
        diffs = z[self.src] - z[self.dst]
        out = np.bincount(self.src, weights=diffs, minlength=self.size) - np.bincount(
            self.dst, weights=diffs, minlength=self.size
        )
        return out + self.boundary_deg * z - self.c * self.d * float(self.d @ z)

    def dense(self) -> np.ndarray:
        mat = np.diag(self.boundary_deg.astype(np.float64))
        np.add.at(mat, (self.src, self.src), 1.0)
        np.add.at(mat, (self.dst, self.dst), 1.0)
        np.add.at(mat, (self.src, self.dst), -1.0)
        np.add.at(mat, (self.dst, self.src), -1.0)
        return mat - self.c * np.outer(self.d, self.d)

    def objective(self, z: np.ndarray) -> float:
        return float(z @ self.apply(z) + 2.0 * self.b @ z)

    def lipschitz(self) -> float:
        local_deg = np.bincount(self.src, minlength=self.size) + np.bincount(self.dst, minlength=self.size)
        return 2.0 * (2.0 * float((local_deg + self.boundary_deg).max(initial=1.0)) + self.c * float(self.d @ self.d))


def solve_restricted(
    g: DiGraph,
    cfg: SpectralConfig | None,
    restriction: Restriction,
) -> SpectralSolution:
    """Minimise Q_c with K pinned to +1/sqrt(n) and M to -1/sqrt(n)."""
    cfg = cfg or SpectralConfig()
    n = g.n
    K, M = restriction.K, restriction.M
    if (K.size and (K.min() < 0 or K.max() >= n)) or (M.size and (M.min() < 0 or M.max() >= n)):
        raise SolverError("restriction refers to vertices outside the graph")
    if np.intersect1d(K, M).size:
        raise SolverError("K and M must be disjoint")
    fixed = np.zeros(n, dtype=bool)
    fixed[K] = True
    fixed[M] = True
    free = np.flatnonzero(~fixed)
    if free.shape[0] < 2:
        raise SolverError("the free block must hold at least two vertices")

    c = resolve_coefficient(g, cfg)
    if not K.size and not M.size:
        return _solve_free(g, cfg, c)

    a = 1.0 / np.sqrt(n)
    x = np.zeros(n)
    x[K] = a
    x[M] = -a
    problem = _local_problem(g, x, fixed, free, c)
    radius = np.sqrt(free.shape[0] / n)

    if free.shape[0] <= cfg.small_threshold:
        z = _exact_sphere_solve(problem, radius)
        converged, iterations, method = True, 0, "exact"
    else:
        z, converged, iterations = _iterative_sphere_solve(problem, radius, cfg)
        method = "projected-gradient"
    x[free] = z
    return SpectralSolution(
        x=x,
        value=quadratic_form(g, x, c),
        converged=converged,
        iterations=iterations,
        method=method,
    )


def _local_problem(g: DiGraph, x: np.ndarray, fixed: np.ndarray, free: np.ndarray, c: float) -> _LocalProblem:
    size = free.shape[0]
    position = np.full(g.n, -1, dtype=np.int64)
    position[free] = np.arange(size)
    src_free = ~fixed[g.src]
    dst_free = ~fixed[g.dst]

    internal = src_free & dst_free
    out_to_fixed = src_free & ~dst_free
    in_from_fixed = ~src_free & dst_free

    boundary_deg = np.bincount(position[g.src[out_to_fixed]], minlength=size)
    boundary_deg += np.bincount(position[g.dst[in_from_fixed]], minlength=size)
    b = np.zeros(size, dtype=np.float64)
    np.subtract.at(b, position[g.src[out_to_fixed]], x[g.dst[out_to_fixed]])
    np.subtract.at(b, position[g.dst[in_from_fixed]], x[g.src[in_from_fixed]])

    d = degree_difference_vector(g)
    b -= c * d[free] * float(d[fixed] @ x[fixed])
    return _LocalProblem(
        size=size,
        src=position[g.src[internal]],
        dst=position[g.dst[internal]],
        boundary_deg=boundary_deg.astype(np.float64),
        d=d[free],
        b=b,
        c=c,
    )


def _exact_sphere_solve(problem: _LocalProblem, radius: float) -> np.ndarray:
    basis = linalg.null_space(np.ones((1, problem.size)))
    reduced = basis.T @ problem.dense() @ basis
    y = sphere_quadratic_minimiser((reduced + reduced.T) / 2.0, basis.T @ problem.b, radius)
    return basis @ y


def sphere_quadratic_minimiser(h: np.ndarray, g_vec: np.ndarray, radius: float) -> np.ndarray:
    """Global minimiser of y^T H y + 2 g^T y subject to ||y|| = radius.

    Solves the secular equation ||(H - lam I)^{-1} g|| = radius for
    lam <= lambda_min(H) and falls back to the hard case when g has no
    component along the lowest eigenspace.
    """
    mu, vecs = linalg.eigh(h)
    beta = vecs.T @ g_vec
    scale = max(1.0, float(np.abs(mu).max(initial=0.0)))
    gnorm = float(np.linalg.norm(beta))
    if gnorm <= 1e-14 * scale:
        return radius * vecs[:, 0]

    lowest = mu - mu[0] <= 1e-10 * scale
    low_norm = float(np.linalg.norm(beta[lowest]))
    if low_norm <= 1e-12 * gnorm:
        particular = np.zeros_like(beta)
        rest = ~lowest
        particular[rest] = -beta[rest] / (mu[rest] - mu[0])
        pnorm = float(np.linalg.norm(particular))
        if pnorm <= radius:
            particular[0] += np.sqrt(max(radius**2 - pnorm**2, 0.0))
            return vecs @ particular

    active = beta != 0.0

    def secular(lam: float) -> float:
        return float(np.sum(beta[active] ** 2 / (mu[active] - lam) ** 2)) - radius**2

    hi = mu[0] - low_norm / radius
    lo = mu[0] - gnorm / radius
    if hi - lo <= 1e-15 * scale or secular(lo) >= 0.0:
        lam = lo
    else:
        try:
            lam = brentq(secular, lo, hi, xtol=1e-14 * scale, maxiter=500)
        except (ValueError, RuntimeError) as exc:
            raise SolverError(f"secular equation has no bracketed root: {exc}") from exc
    y = np.zeros_like(beta)
    y[active] = -beta[active] / (mu[active] - lam)
    norm = float(np.linalg.norm(y))
    if norm > 0:
        y *= radius / norm
    return vecs @ y


def _center(v: np.ndarray) -> np.ndarray:
    return v - v.mean()


def _krylov_start(problem: _LocalProblem, radius: float, cfg: SpectralConfig) -> np.ndarray:
    rng = np.random.default_rng(cfg.seed)
    seeds = [_center(problem.b), _center(rng.standard_normal(problem.size))]
    dim = min(KRYLOV_DIM, problem.size - 1)
    basis: list[np.ndarray] = []

    def push(v: np.ndarray) -> bool:
        for _ in range(2):
            for q in basis:
                v = v - float(q @ v) * q
        norm = float(np.linalg.norm(v))
        if norm <= 1e-10:
            return False
        basis.append(v / norm)
        return True

    for seed_vec in seeds:
        if len(basis) >= dim:
            break
        if not push(seed_vec):
            continue
        while len(basis) < dim:
            if not push(_center(problem.apply(basis[-1]))):
                break

    q = np.column_stack(basis)
    aq = np.column_stack([problem.apply(q[:, j]) for j in range(q.shape[1])])
    h = q.T @ aq
    y = sphere_quadratic_minimiser((h + h.T) / 2.0, q.T @ problem.b, radius)
    z = _center(q @ y)
    return z * (radius / np.linalg.norm(z))


def _iterative_sphere_solve(
    problem: _LocalProblem,
    radius: float,
    cfg: SpectralConfig,
) -> tuple[np.ndarray, bool, int]:
    z = _krylov_start(problem, radius, cfg)
    lip = problem.lipschitz()
    target = cfg.tol * (lip * radius + 2.0 * float(np.linalg.norm(problem.b)))

    def tangent_gradient(v: np.ndarray) -> np.ndarray:
        grad = _center(2.0 * (problem.apply(v) + problem.b))
        return grad - (float(grad @ v) / radius**2) * v

    best_z, best_f = z, problem.objective(z)
    grad = tangent_gradient(z)
    prev_z = prev_grad = None
    converged = False
    iterations = 0
    while True:
        if float(np.linalg.norm(grad)) <= target:
            converged = True
            break
        if iterations >= cfg.max_iter:
            break
        iterations += 1
        step = 1.0 / lip
        if prev_z is not None:
            s = z - prev_z
            y = grad - prev_grad
            sy = float(s @ y)
            if sy > 0:
                step = min(max(float(s @ s) / sy, 1e-3 / lip), 1e3 / lip)
        prev_z, prev_grad = z, grad
        z = _center(z - step * grad)
        z *= radius / np.linalg.norm(z)
        grad = tangent_gradient(z)
        f = problem.objective(z)
        if f < best_f:
            best_z, best_f = z, f

    if not converged:
        logger.debug("Restricted solve on %s vertices hit max_iter=%s", problem.size, cfg.max_iter)
    return best_z, converged, iterations
