"""Lowest eigenpairs and eigenvalue counts, plus the ground state transform check.

All routines accept a :class:`~lifshitz_lab.grid.DiscreteOperator` (the
generalized problem ``K phi = lam M phi``) or a plain symmetric matrix
(``M = I``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh, splu

from .grid import DiscreteOperator, GridFunction

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DENSE_THRESHOLD = 1500


class EigensolverError(RuntimeError):
    """An eigen or factorization routine failed to meet its contract."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


@dataclass
class EigenResult:
    values: np.ndarray
    vectors: np.ndarray  # (count, num_nodes), L^2-orthonormal
    residuals: np.ndarray
    method: str
    iterations: int = 0
    domain: object = field(default=None, repr=False)

    @property
    def ground_energy(self) -> float:
        return float(self.values[0])

    @property
    def ground(self) -> GridFunction:
        return GridFunction(self.domain, self.vectors[0])

    def functions(self) -> list:
        return [GridFunction(self.domain, v) for v in self.vectors]

    def cluster(self, tol: float) -> int:
        """Multiplicity of the lowest eigenvalue within ``tol``."""
        return int(np.sum(self.values - self.values[0] <= tol))


@dataclass(frozen=True)
class InertiaCount:
    shift: float
    count: int
    negative: int
    zero: int
    positive: int
    jitters: int = 0


def _split(op):
    """Return (K, m, domain, free mask) for an operator or a bare matrix."""
    if isinstance(op, DiscreteOperator):
        k, m = op.reduced()
        return k, m, op.domain, op.free
    k = sp.csr_matrix(op, dtype=float)
    return k, np.ones(k.shape[0]), None, None


def _lower_bound(op, a: sp.spmatrix) -> float:
    if isinstance(op, DiscreteOperator):
        return float(np.min(op.potential[op.free]))
    # Gershgorin
    dia = a.diagonal()
    rad = np.asarray(abs(a).sum(axis=1)).ravel() - np.abs(dia)
    return float(np.min(dia - rad))


def smallest_eigs(
    op,
    count: int = 1,
    tol: float = DEFAULT_TOL,
    dense_threshold: int = DENSE_THRESHOLD,
    method: str = "auto",
    maxiter: Optional[int] = None,
) -> EigenResult:
    """Lowest ``count`` eigenpairs of a symmetric operator.

    Residuals are ``||A v - lam v||`` for the symmetrized matrix
    ``A = M^{-1/2} K M^{-1/2}`` and unit vectors ``v``, and must not exceed
    ``tol * max(1, ||A||_1)``. Matrices below ``dense_threshold`` rows are
    solved densely; larger ones by shift-invert Lanczos with the shift placed
    below the spectrum.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    k, m, domain, free = _split(op)
    size = k.shape[0]
    if count > size:
        raise ValueError(f"count {count} exceeds matrix size {size}")
    s = 1.0 / np.sqrt(m)
    a = (sp.diags(s) @ k @ sp.diags(s)).tocsr()
    if method == "auto":
        method = "dense" if size <= dense_threshold or count >= size - 1 else "lanczos"
    iterations = 0
    if method == "dense":
        w, v = la.eigh(a.toarray(), subset_by_index=[0, count - 1])
    elif method == "lanczos":
        sigma = _lower_bound(op, a) - 1.0
        try:
            w, v = eigsh(a.tocsc(), k=count, sigma=sigma, which="LM", tol=tol * 1e-3,
                         maxiter=maxiter)
        except ArpackNoConvergence as exc:
            raise EigensolverError(
                f"Lanczos did not converge for {count} eigenpairs", exc.eigenvalues
            ) from exc
        order = np.argsort(w)
        w, v = w[order], v[:, order]
    else:
        raise ValueError(f"unknown method {method!r}")

    scale = max(1.0, float(abs(a).sum(axis=0).max()))
    res = np.linalg.norm(a @ v - v * w, axis=0)
    if np.any(res > tol * scale):
        raise EigensolverError(
            f"residual {res.max():.3e} above {tol * scale:.3e} ({method})", res
        )

    vecs = v * s[:, None]
    if domain is not None:
        full = np.zeros((domain.num_nodes, count))
        full[free] = vecs
        vecs = full
        norms = domain.cell_volume * (op.mass @ vecs**2)
        vecs = vecs / np.sqrt(norms)
    vecs = vecs.T.copy()
    for i, vec in enumerate(vecs):
        ref = vec.mean() if i == 0 else vec[np.argmax(np.abs(vec))]
        if ref < 0:
            vecs[i] = -vec
    return EigenResult(np.asarray(w, dtype=float), vecs, res, method, iterations, domain)


def ground_energy(op, **kwargs) -> float:
    return smallest_eigs(op, 1, **kwargs).ground_energy


def _is_tridiagonal(k: sp.csr_matrix) -> bool:
    coo = k.tocoo()
    return bool(np.all(np.abs(coo.row - coo.col) <= 1))


def sturm_counts(diag: np.ndarray, off: np.ndarray, mass: np.ndarray, energies) -> np.ndarray:
    """Number of eigenvalues ``<= E`` of tridiagonal pencils ``(K, diag(mass))``.

    ``diag`` may carry leading batch axes ``(..., N)``; the result has shape
    ``(..., len(energies))``. Pivots that vanish are replaced by a tiny
    negative number, which counts an eigenvalue sitting exactly at ``E``.
    """
    e = np.atleast_1d(np.asarray(energies, dtype=float))
    diag = np.asarray(diag, dtype=float)
    b2 = np.asarray(off, dtype=float) ** 2
    pivmin = np.finfo(float).tiny / np.finfo(float).eps * max(1.0, float(b2.max(initial=0.0)))
    shape = diag.shape[:-1] + e.shape
    count = np.zeros(shape, dtype=np.int64)
    q = np.zeros(shape)
    for i in range(diag.shape[-1]):
        q = diag[..., i, None] - e * mass[i]
        if i > 0:
            q = q - b2[i - 1] / prev
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        count += q < 0
        prev = q
    return count


def count_below(op, E: float, tol_shift: Optional[float] = None, max_jitter: int = 5) -> InertiaCount:
    """Number of eigenvalues ``<= E`` from the inertia of ``K - E M``.

    Tridiagonal pencils use a Sturm recurrence; everything else an LDL^T
    factorization (SuperLU with symmetric ordering and no off-diagonal
    pivoting). A zero pivot in the latter triggers a retry at ``E + jitter``,
    with the number of retries reported.
    """
    k, m, _, _ = _split(op)
    if _is_tridiagonal(k):
        c = int(sturm_counts(k.diagonal(), k.diagonal(1), m, [E])[0])
        return InertiaCount(float(E), c, c, 0, k.shape[0] - c)
    norm = max(1.0, float(abs(k).sum(axis=0).max()))
    if tol_shift is None:
        tol_shift = 1e-9 * norm
    shift = float(E)
    for attempt in range(max_jitter + 1):
        b = (k - shift * sp.diags(m)).tocsc()
        pivots = _ldl_pivots(b)
        zero = int(np.sum(np.abs(pivots) <= 1e-14 * norm))
        if zero == 0:
            neg = int(np.sum(pivots < 0))
            return InertiaCount(shift, neg, neg, 0, len(pivots) - neg, attempt)
        shift = float(E) + tol_shift * (attempt + 1)
        log.debug("zero pivot at shift %g, retrying at %g", E, shift)
    raise EigensolverError(f"factorization breaks down near E={E} after {max_jitter} jitters")


def _ldl_pivots(b: sp.csc_matrix) -> np.ndarray:
    if b.shape[0] <= 400:
        _, d, _ = la.ldl(b.toarray())
        return np.linalg.eigvalsh(d) if np.count_nonzero(np.diag(d, 1)) else np.diag(d)
    lu = splu(b, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
              options=dict(SymmetricMode=True))
    if not np.array_equal(lu.perm_r, lu.perm_c):
        raise EigensolverError("SuperLU applied a non-symmetric permutation")
    return lu.U.diagonal()


def count_below_many(op, energies) -> np.ndarray:
    """Counts at several energies (one factorization per energy)."""
    k, m, _, _ = _split(op)
    if _is_tridiagonal(k):
        return sturm_counts(k.diagonal(), k.diagonal(1), m, energies)
    return np.array([count_below(op, e).count for e in energies])


@dataclass(frozen=True)
class GSTCertificate:
    lhs: float          # Q(phi) - lam0 ||phi||^2
    rhs: float          # sum_edges c_e Psi_i Psi_j (f_i - f_j)^2
    residual: float
    relative: float
    c1: float           # (min Psi)^-2
    gradient_f: float   # sum_edges c_e (f_i - f_j)^2
    bound_holds: bool


def gst_certificate(op: DiscreteOperator, ground: EigenResult, phi) -> GSTCertificate:
    """Check the discrete ground state transform for ``phi``.

    With ``f = phi / Psi`` and edge weights ``c_e`` of the physical
    Dirichlet form,

        Q(phi) - lam0 ||phi||^2 = sum_e c_e Psi_i Psi_j (f_i - f_j)^2,

    and therefore ``||grad f||^2 <= (min Psi)^-2 (Q(phi) - lam0 ||phi||^2)``.
    """
    psi = ground.vectors[0]
    if np.min(psi) <= 0:
        raise ValueError(f"ground state has a nonpositive node (min {np.min(psi):.3e})")
    lam0 = ground.values[0]
    v = phi.flat if isinstance(phi, GridFunction) else np.asarray(phi, float).ravel()
    upper = sp.triu(op.laplacian, k=1).tocoo()
    c = -upper.data * op.domain.cell_volume
    f = v / psi
    df2 = (f[upper.row] - f[upper.col]) ** 2
    rhs = float(np.sum(c * psi[upper.row] * psi[upper.col] * df2))
    q = op.quadratic_form(v)
    lhs = q - lam0 * op.norm2(v)
    grad_f = float(np.sum(c * df2))
    c1 = float(np.min(psi) ** -2)
    residual = abs(lhs - rhs)
    scale = max(abs(q), abs(lam0) * op.norm2(v), np.finfo(float).tiny)
    return GSTCertificate(
        lhs, rhs, residual, residual / scale, c1, grad_f,
        bool(grad_f <= c1 * rhs * (1 + 1e-12) + 1e-300),
    )
