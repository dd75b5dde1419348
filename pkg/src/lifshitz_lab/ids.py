"""Monte Carlo integrated density of states with its exponent fits.

The coupling-model analyses and the displacement sweep live here as well.

A model provides ``sample_field(L, seed, trial)`` returning the potential
of ``H_{omega,L}^N`` on the box ``[0, L]^d``; trial ``t`` always draws from
the generator stream ``(seed, t)``, so estimates do not depend on the order
or the number of threads in which trials run.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as la
from scipy.optimize import brentq

from .eig import EigensolverError, count_below_many, smallest_eigs, sturm_counts
from .grid import GridDomain, GridFunction, INTERVAL, assemble_operator, laplacian_matrix
from .potential import (
    AlloyConfiguration,
    BackgroundPotential,
    CouplingConfiguration,
    DisplacementModel,
    SingleSitePotential,
    SiteDistribution,
    alloy_domain,
    realize_displacement,
    realize_field,
    trial_rng,
)
from .spectral import Catalogue, EquivalenceReport, SlopeFit, find_bracket, loglog_fit

log = logging.getLogger(__name__)

TOL_NUM = 1e-9


# --------------------------------------------------------------------------
# models

@dataclass(frozen=True)
class AlloyModel:
    """Random site types drawn i.i.d. from ``distribution``."""

    catalogue: Catalogue
    distribution: SiteDistribution

    def __post_init__(self):
        if len(self.distribution) != len(self.catalogue):
            raise ValueError("one probability per catalogue site is required")

    @property
    def dimension(self) -> int:
        return self.catalogue.dimension

    @property
    def n(self) -> int:
        return self.catalogue.n

    def sample_config(self, L: int, seed: int, trial: int) -> AlloyConfiguration:
        rng = trial_rng(seed, trial)
        types = rng.choice(len(self.distribution), size=(L,) * self.dimension, p=self.distribution.p)
        return AlloyConfiguration(types, seed, trial)

    def sample_field(self, L: int, seed: int, trial: int) -> GridFunction:
        dom = alloy_domain((L,) * self.dimension, self.n)
        cfg = self.sample_config(L, seed, trial)
        return realize_field(self.catalogue.background, self.catalogue.sites, cfg, dom)

    def descriptor(self) -> dict:
        return {
            "kind": "alloy",
            "sites": [s.name for s in self.catalogue.sites],
            "probabilities": list(self.distribution.probabilities),
            "d": self.dimension,
            "n": self.n,
        }


@dataclass(frozen=True)
class CouplingModel:
    """Couplings ``omega_gamma`` drawn from a finite atom list in ``[a, b]``."""

    site: SingleSitePotential
    atoms: tuple
    probabilities: tuple
    a: float
    b: float
    background: Optional[BackgroundPotential] = None

    def __post_init__(self):
        SiteDistribution(self.probabilities)
        if len(self.atoms) != len(self.probabilities):
            raise ValueError("one probability per atom is required")
        if any(x < self.a or x > self.b for x in self.atoms):
            raise ValueError("atoms must lie in [a, b]")

    @property
    def dimension(self) -> int:
        return self.site.dimension

    @property
    def n(self) -> int:
        return self.site.n

    def sample_config(self, L: int, seed: int, trial: int) -> CouplingConfiguration:
        rng = trial_rng(seed, trial)
        idx = rng.choice(len(self.atoms), size=(L,) * self.dimension, p=np.asarray(self.probabilities))
        return CouplingConfiguration(np.asarray(self.atoms, float)[idx], self.a, self.b)

    def sample_field(self, L: int, seed: int, trial: int) -> GridFunction:
        dom = alloy_domain((L,) * self.dimension, self.n)
        return realize_field(self.background, [self.site], self.sample_config(L, seed, trial), dom)

    def descriptor(self) -> dict:
        return {"kind": "coupling", "site": self.site.name, "atoms": list(self.atoms),
                "probabilities": list(self.probabilities), "a": self.a, "b": self.b,
                "d": self.dimension, "n": self.n}


@dataclass(frozen=True)
class DisplacementIDSModel:
    model: DisplacementModel

    def __post_init__(self):
        if self.model.probabilities is not None:
            SiteDistribution(self.model.probabilities)

    @property
    def dimension(self) -> int:
        return self.model.dimension

    @property
    def n(self) -> int:
        return self.model.n

    def sample_field(self, L: int, seed: int, trial: int) -> GridFunction:
        rng = trial_rng(seed, trial)
        disp = np.asarray(self.model.displacements)
        p = None if self.model.probabilities is None else np.asarray(self.model.probabilities)
        idx = rng.choice(len(disp), size=(L,) * self.dimension, p=p)
        dom = alloy_domain((L,) * self.dimension, self.n)
        return realize_displacement(self.model, disp[idx], dom)

    def descriptor(self) -> dict:
        return {"kind": "displacement", "delta": self.model.delta,
                "displacements": [list(t) for t in self.model.displacements],
                "d": self.dimension, "n": self.n}


# --------------------------------------------------------------------------
# IDS estimation

@dataclass(frozen=True)
class IDSEstimate:
    model: dict
    L: int
    dimension: int
    energies: np.ndarray
    mean: np.ndarray          # E[count] / L^d
    se: np.ndarray
    trials: int
    seed: int
    max_count: np.ndarray     # largest count at each E over the trials
    p_low: np.ndarray         # fraction of trials with lambda_min <= E
    failures: int = 0

    @property
    def censored(self) -> np.ndarray:
        return self.mean <= 0

    @property
    def resolution(self) -> float:
        """One count in one trial, in IDS units."""
        return 1.0 / (self.trials * self.L**self.dimension)

    def rows(self) -> list:
        return [
            {"E": float(e), "N_mean": float(m), "N_se": float(s), "trials": int(self.trials),
             "censored": bool(c)}
            for e, m, s, c in zip(self.energies, self.mean, self.se, self.censored)
        ]


def geometric_energies(e_min: float, e_max: float, count: int) -> np.ndarray:
    if not 0 < e_min < e_max or count < 2:
        raise ValueError("need 0 < e_min < e_max and at least two energies")
    return np.geomspace(e_min, e_max, count)


def _tridiagonal_parts(dom: GridDomain):
    lap = laplacian_matrix(dom)
    return lap.diagonal(), lap.diagonal(1), dom.node_weights()


def estimate_ids(model, L: int, energies, trials: int, seed: int, threads: int = 1,
                 batch: int = 512, max_failure_rate: float = 0.01) -> IDSEstimate:
    """Mean eigenvalue count per unit volume of ``H_{omega,L}^N`` below each energy.

    One-dimensional models are counted with a batched Sturm recurrence; in
    higher dimension each trial factorizes the shifted operator once per
    energy. Solver failures are skipped and counted; more than
    ``max_failure_rate`` of failed trials aborts the estimate.
    """
    e = np.asarray(energies, dtype=float)
    if e.ndim != 1 or e.size == 0 or np.any(np.diff(e) <= 0):
        raise ValueError("energies must be a strictly increasing 1-d grid")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if L < 1:
        raise ValueError("L must be >= 1")
    d = model.dimension
    counts = np.zeros((trials, e.size), dtype=np.int64)
    ok = np.ones(trials, dtype=bool)
    if d == 1:
        dom = alloy_domain((L,), model.n)
        diag0, off, mass = _tridiagonal_parts(dom)
        for start in range(0, trials, batch):
            stop = min(trials, start + batch)
            w = np.stack([model.sample_field(L, seed, t).flat for t in range(start, stop)])
            counts[start:stop] = sturm_counts(diag0 + mass * w, off, mass, e)
    else:
        def one(t):
            f = model.sample_field(L, seed, t)
            try:
                return count_below_many(assemble_operator(f.domain, f), e)
            except EigensolverError as exc:
                log.warning("trial %d failed: %s", t, exc)
                return None

        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                results = list(pool.map(one, range(trials)))
        else:
            results = [one(t) for t in range(trials)]
        for t, r in enumerate(results):
            if r is None:
                ok[t] = False
            else:
                counts[t] = r
    failures = int((~ok).sum())
    if failures > max_failure_rate * trials:
        raise EigensolverError(f"{failures} of {trials} trials failed", failures)
    good = counts[ok]
    vol = float(L**d)
    dens = good / vol
    mean = dens.mean(axis=0)
    se = dens.std(axis=0, ddof=1) / np.sqrt(len(dens)) if len(dens) > 1 else np.zeros_like(mean)
    return IDSEstimate(
        model.descriptor(), int(L), d, e, mean, se, int(len(good)), int(seed),
        good.max(axis=0), (good > 0).mean(axis=0), failures,
    )


def tail_bound_margin(est: IDSEstimate) -> np.ndarray:
    """Margin of ``N <= (max count / L^d) P(lambda_min <= E) + 3 SE`` per energy."""
    bound = est.max_count / est.L**est.dimension * est.p_low
    return bound + 3 * est.se - est.mean


# --------------------------------------------------------------------------
# exponent fits

@dataclass(frozen=True)
class ExponentFit:
    kind: str
    window: tuple
    slope: float
    stderr: float
    intercept: float
    energies: np.ndarray          # points used
    values: np.ndarray
    censored: np.ndarray          # energies excluded for zero counts
    stronger: Optional[np.ndarray] = None   # |log N| E^{1/2} (lifshitz)

    def rows(self) -> list:
        rows = [{"E": float(e), "N": float(v), "used": True} for e, v in zip(self.energies, self.values)]
        rows += [{"E": float(e), "N": 0.0, "used": False} for e in self.censored]
        return sorted(rows, key=lambda r: r["E"])


def fit_exponent(est, kind: str, window: Sequence[float]) -> ExponentFit:
    """Log-log slope of the IDS over an energy window.

    ``kind="van-hove"`` fits ``log N`` against ``log E``; ``kind="lifshitz"``
    fits ``log |log N|`` against ``log E`` and also returns the statistic
    ``|log N(E)| E^{1/2}``. ``est`` is an :class:`IDSEstimate` or a pair
    ``(energies, values)``. Points with zero counts are censored.
    """
    if isinstance(est, IDSEstimate):
        E, N = est.energies, est.mean
    else:
        E, N = (np.asarray(x, float) for x in est)
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError("empty window")
    sel = (E >= lo) & (E <= hi)
    cens = E[sel & (N <= 0)]
    use = sel & (N > 0)
    if kind == "lifshitz":
        if np.any(N[use] >= 1):
            raise ValueError("lifshitz fit needs 0 < N < 1 inside the window")
        y = np.abs(np.log(N[use]))
        stronger = y * np.sqrt(E[use])
    elif kind == "van-hove":
        y = N[use]
        stronger = None
    else:
        raise ValueError(f"unknown fit kind {kind!r}")
    if use.sum() < 4:
        raise ValueError(f"only {int(use.sum())} usable points in window [{lo}, {hi}]; need 4")
    fit = loglog_fit(E[use], y)
    return ExponentFit(kind, (lo, hi), fit.slope, fit.stderr, fit.intercept, E[use], N[use], cens, stronger)


def weyl_constant(d: int) -> float:
    """Free IDS prefactor: ``N_0(E) = weyl_constant(d) E^{d/2}``."""
    ball = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    return ball / (2 * math.pi) ** d


def khat(catalogue: Catalogue, types: Sequence[int], axis: int = -1) -> tuple:
    """``K = max_k sup(mu_k Psi_k) / min_k inf(mu_k Psi_k)`` over ``types``.

    ``mu_k`` matches the face trace of ``Psi_k`` to that of the first type
    in the least-squares sense. Returns ``(K, mus)``.
    """
    from .spectral import boundary_proportionality

    ref = types[0]
    mus = [1.0 if k == ref else boundary_proportionality(catalogue, ref, k, axis).mu2 for k in types]
    sups = [mu * catalogue.cell(k).vectors[0].max() for mu, k in zip(mus, types)]
    infs = [mu * catalogue.cell(k).vectors[0].min() for mu, k in zip(mus, types)]
    return float(max(sups) / min(infs)), mus


@dataclass(frozen=True)
class Envelope:
    ratios: np.ndarray     # N / (c_d E^{d/2})
    lower: float
    upper: float
    energies: np.ndarray

    @property
    def holds(self) -> bool:
        return bool(np.all((self.ratios >= self.lower) & (self.ratios <= self.upper)))


def van_hove_envelope(est: IDSEstimate, K: float, window: Sequence[float]) -> Envelope:
    """Compare ``N / (c_d E^{d/2})`` with ``[K^-2, K^2]`` over ``window``."""
    sel = (est.energies >= window[0]) & (est.energies <= window[1])
    E = est.energies[sel]
    r = est.mean[sel] / (weyl_constant(est.dimension) * E ** (est.dimension / 2))
    return Envelope(r, K**-2, K**2, E)


# --------------------------------------------------------------------------
# columns in (b)

@dataclass(frozen=True)
class ColumnProbability:
    q_col: float          # P(a given column is in (b))
    union_bound: float    # L^{d-1} q_col
    any_column: float     # exact P(some column is in (b))


def bad_column_probability(dist: SiteDistribution, report: EquivalenceReport, L: int, d: int) -> ColumnProbability:
    """Exact probability that a column of ``L`` cells is one equivalence class."""
    p = dist.p
    q = float(sum(sum(p[k] for k in cls) ** L for cls in report.classes))
    cols = L ** (d - 1)
    return ColumnProbability(q, cols * q, float(1 - (1 - q) ** cols))


@dataclass(frozen=True)
class ColumnFrequency:
    column: float
    column_se: float
    any_column: float
    any_column_se: float
    samples: int


def sample_bad_columns(dist: SiteDistribution, report: EquivalenceReport, L: int, d: int,
                       samples: int, seed: int) -> ColumnFrequency:
    """Monte Carlo frequencies of (b) columns and of boxes with some (b) column."""
    rng = trial_rng(seed, 0)
    cls = np.array([report.class_of(k) for k in range(len(dist))])
    types = rng.choice(len(dist), size=(samples, L ** (d - 1), L), p=dist.p)
    c = cls[types]
    bad = (c[..., 0] >= 0) & np.all(c == c[..., :1], axis=-1)
    col = bad.mean()
    anyc = bad.any(axis=1)
    n_col = bad.size
    return ColumnFrequency(
        float(col), float(np.sqrt(max(col * (1 - col), 1e-300) / n_col)),
        float(anyc.mean()), float(np.sqrt(max(anyc.mean() * (1 - anyc.mean()), 1e-300) / samples)),
        int(samples),
    )


# --------------------------------------------------------------------------
# coupling model

def coupling_energy(V: SingleSitePotential, lam: float, background: Optional[BackgroundPotential] = None) -> float:
    """``E_-(lam)``: ground energy of ``-Laplace + lam V`` on the unit cell."""
    dom = alloy_domain((1,) * V.dimension, V.n)
    w = lam * V.values + (0.0 if background is None else background.total)
    return smallest_eigs(assemble_operator(dom, GridFunction(dom, w)), 1, tol=1e-12).ground_energy


def box_energy(V: SingleSitePotential, couplings: np.ndarray, a: float, b: float,
               background: Optional[BackgroundPotential] = None) -> float:
    """``E_{-,L}(omega)`` for a coupling configuration on the box."""
    cfg = CouplingConfiguration(np.asarray(couplings, float), a, b)
    dom = alloy_domain(cfg.box, V.n)
    f = realize_field(background, [V], cfg, dom)
    return smallest_eigs(assemble_operator(dom, f), 1, tol=1e-12).ground_energy


def tune_endpoint(V: SingleSitePotential, a: float, lo: float, hi: float, xtol: float = 1e-12) -> float:
    """``b`` in ``[lo, hi]`` with ``E_-(b) = E_-(a)`` (first crossing)."""
    ea = coupling_energy(V, a)
    f = lambda lam: coupling_energy(V, lam) - ea  # noqa: E731
    s, t = find_bracket(f, lo, hi)
    return float(brentq(f, s, t, xtol=xtol))


@dataclass(frozen=True)
class CouplingCurve:
    grid: np.ndarray
    energies: np.ndarray
    midpoints: np.ndarray
    deficits: np.ndarray      # E(mid) - (E(l) + E(r)) / 2 for consecutive grid points
    e_a: float
    e_b: float
    box_a: float              # constant-configuration box energies
    box_b: float

    @property
    def e_minus(self) -> float:
        return min(self.e_a, self.e_b)

    @property
    def curve_min(self) -> float:
        return float(self.energies.min())

    def rows(self) -> list:
        out = [{"lambda": float(x), "E_minus": float(y), "deficit": ""} for x, y in zip(self.grid, self.energies)]
        out += [{"lambda": float(x), "E_minus": "", "deficit": float(dd)}
                for x, dd in zip(self.midpoints, self.deficits)]
        return sorted(out, key=lambda r: r["lambda"])


def coupling_curve(V: SingleSitePotential, grid: Sequence[float], box_L: int = 2) -> CouplingCurve:
    """``E_-`` on a grid of couplings, midpoint concavity deficits and endpoints.

    The endpoint energies are compared with the ground energies of boxes of
    ``box_L^d`` cells carrying the constant configurations ``a`` and ``b``.
    """
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size < 2 or np.any(np.diff(g) <= 0):
        raise ValueError("grid must be strictly increasing with at least two points")
    E = np.array([coupling_energy(V, x) for x in g])
    mids = 0.5 * (g[:-1] + g[1:])
    Em = np.array([coupling_energy(V, x) for x in mids])
    deficits = Em - 0.5 * (E[:-1] + E[1:])
    a, b = float(g[0]), float(g[-1])
    shape = (box_L,) * V.dimension
    box_a = box_energy(V, np.full(shape, a), a, b)
    box_b = box_energy(V, np.full(shape, b), a, b)
    return CouplingCurve(g, E, mids, deficits, float(E[0]), float(E[-1]), box_a, box_b)


@dataclass(frozen=True)
class ConcavityReport:
    deficits: np.ndarray
    point: np.ndarray
    hessian_fd: np.ndarray
    hessian_pt: np.ndarray

    @property
    def worst(self) -> float:
        return float(self.deficits.min())

    @property
    def fd_eigs(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.hessian_fd + self.hessian_fd.T))

    @property
    def pt_eigs(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.hessian_pt)


def _box_form(V: SingleSitePotential, L: int):
    """Dense symmetric parts for ``omega -> M^{-1/2} K(omega) M^{-1/2}``."""
    d = V.dimension
    dom = alloy_domain((L,) * d, V.n)
    lap = laplacian_matrix(dom).toarray()
    m = dom.node_weights()
    s = 1.0 / np.sqrt(m)
    base = s[:, None] * lap * s[None, :]
    fields = []
    for gamma in itertools.product(range(L), repeat=d):
        c = np.zeros((L,) * d)
        c[gamma] = 1.0
        cfg = CouplingConfiguration(c, 0.0, 1.0)
        fields.append(realize_field(None, [V], cfg, dom).flat)
    return base, np.array(fields)


def _lowest(base, fields, omega):
    w = omega @ fields
    return la.eigh(base + np.diag(w), eigvals_only=True, subset_by_index=[0, 0])[0]


def finite_volume_concavity(V: SingleSitePotential, L: int, a: float, b: float, samples: int,
                            seed: int, step: float = 1e-3) -> ConcavityReport:
    """Midpoint deficits of ``omega -> E_{-,L}(omega)`` and its Hessian.

    Random pairs ``omega, omega'`` are uniform on ``[a, b]^{Z_L}``. The
    Hessian at the first sample is computed by central differences and by
    second-order perturbation theory, ``-2 sum_k <u_k, D_b u_0><u_k, D_c u_0>
    / (lam_k - lam_0)`` with ``D_c`` the coupling field of cell ``c``.
    """
    d = V.dimension
    if L**d > 64:
        raise ValueError("dense Hessian work is limited to 64 sites")
    if step < 1e-6 * max(1.0, abs(b - a)):
        raise ValueError("finite-difference step too small for double precision")
    base, fields = _box_form(V, L)
    rng = trial_rng(seed, 0)
    S = L**d
    deficits = np.empty(samples)
    first = None
    for t in range(samples):
        w1 = rng.uniform(a, b, S)
        w2 = rng.uniform(a, b, S)
        if first is None:
            first = w1
        deficits[t] = _lowest(base, fields, 0.5 * (w1 + w2)) - 0.5 * (
            _lowest(base, fields, w1) + _lowest(base, fields, w2))
    x = first
    E0 = _lowest(base, fields, x)
    H = np.empty((S, S))
    eye = np.eye(S) * step
    for i in range(S):
        H[i, i] = (_lowest(base, fields, x + eye[i]) - 2 * E0 + _lowest(base, fields, x - eye[i])) / step**2
        for j in range(i + 1, S):
            v = (_lowest(base, fields, x + eye[i] + eye[j]) - _lowest(base, fields, x + eye[i] - eye[j])
                 - _lowest(base, fields, x - eye[i] + eye[j]) + _lowest(base, fields, x - eye[i] - eye[j]))
            H[i, j] = H[j, i] = v / (4 * step**2)
    lam, u = la.eigh(base + np.diag(x @ fields))
    proj = u.T @ (fields.T * u[:, :1])       # <u_k, D_c u_0>, shape (nodes, S)
    gaps = lam[1:] - lam[0]
    Hpt = -2 * (proj[1:].T / gaps) @ proj[1:]
    return ConcavityReport(deficits, x, H, Hpt)


@dataclass(frozen=True)
class PropertyPReport:
    L: int
    c_hat: float
    values: np.ndarray        # (E_{-,L}(omega) - E_-(a)) L^2 per sample
    violations: int           # samples with E_{-,L}(omega) <= E_-(a)
    rejected: int


def sample_p_prime(L: int, d: int, a: float, b: float, eps: float, rng, endpoint_mass: float = 0.8,
                   max_tries: int = 10000) -> tuple:
    """Configuration in ``[a, b]^{Z_L}`` satisfying (P'), by rejection.

    Each coordinate is ``a`` or ``b`` with probability ``endpoint_mass / 2``
    each and uniform on ``[a, b]`` otherwise; samples where some column
    along the last axis has no coordinate in ``[a + eps, b - eps]`` are
    rejected. Returns ``(omega, rejected)``.
    """
    for tries in range(max_tries):
        u = rng.random((L,) * d)
        w = rng.uniform(a, b, (L,) * d)
        w = np.where(u < endpoint_mass / 2, a, np.where(u < endpoint_mass, b, w))
        inside = (w >= a + eps) & (w <= b - eps)
        if np.all(inside.any(axis=-1)):
            return w, tries
    raise RuntimeError("could not sample a configuration with property (P')")


def property_P_verify(V: SingleSitePotential, a: float, b: float, eps: float, L: int, trials: int,
                      seed: int, endpoint_mass: float = 0.8, tol: float = 1e-8) -> PropertyPReport:
    """``min (E_{-,L}(omega) - E_-(a)) L^2`` over samples with property (P')."""
    ea, eb = coupling_energy(V, a), coupling_energy(V, b)
    if abs(ea - eb) > tol:
        raise ValueError(f"endpoints not tuned: E(a)={ea:.3e}, E(b)={eb:.3e}")
    if min(coupling_energy(V, a + eps), coupling_energy(V, b - eps)) <= ea:
        raise ValueError("eps too small: E(a+eps) or E(b-eps) does not exceed E(a)")
    d = V.dimension
    vals = np.empty(trials)
    rejected = 0
    for t in range(trials):
        rng = trial_rng(seed, t)
        w, r = sample_p_prime(L, d, a, b, eps, rng, endpoint_mass)
        rejected += r
        vals[t] = (box_energy(V, w, a, b) - ea) * L**2
    return PropertyPReport(L, float(vals.min()), vals, int(np.sum(vals <= 0)), rejected)


# --------------------------------------------------------------------------
# displacement model

@dataclass(frozen=True)
class DisplacementSweep:
    betas: np.ndarray         # (K, d) integer node positions of the bump centre
    energies: np.ndarray
    argmin: tuple
    corners: tuple
    tol: float
    n: int

    @property
    def matches_corners(self) -> bool:
        return set(self.argmin) == set(self.corners)

    def landscape(self) -> np.ndarray:
        side = int(round(len(self.betas) ** (1 / self.betas.shape[1])))
        return self.energies.reshape((side,) * self.betas.shape[1])


def displacement_sweep(model: DisplacementModel, tol: float = 1e-9) -> DisplacementSweep:
    """Ground energy of ``-Laplace + q(x - beta)`` on the unit cell for every
    grid point ``beta`` of ``[delta, 1 - delta]^d``; the argmin set collects
    the points within ``tol`` (relative to the energy range) of the minimum."""
    d, n, k = model.dimension, model.n, model.delta_nodes
    pts = list(itertools.product(range(k, n - k + 1), repeat=d))
    dom = alloy_domain((1,) * d, n)
    E = np.array([
        smallest_eigs(assemble_operator(dom, GridFunction(dom, model.site(b).values)), 1, tol=1e-12).ground_energy
        for b in pts
    ])
    span = max(float(E.max() - E.min()), np.finfo(float).tiny)
    lo = E.min()
    arg = tuple(p for p, e in zip(pts, E) if e - lo <= tol * max(span, abs(lo)))
    return DisplacementSweep(np.array(pts), E, arg, model.corner_set_nodes(), tol, n)


def nonconstancy_outside_support(q: np.ndarray, n: int, half_width: int = 1) -> float:
    """Discrete check that the ground state of ``-Laplace + q`` is not constant
    off the support of ``q``.

    The Neumann problem is posed on the cube ``[-half_width, half_width]^d``
    centred on the bump. Returns the largest difference quotient of the
    normalized ground state across edges with both ends off the support.
    """
    d = q.ndim
    cells = 2 * half_width
    dom = GridDomain((cells,) * d, n, (INTERVAL,) * d)
    w = np.zeros(dom.shape)
    k = (q.shape[0] - 1) // 2
    centre = half_width * n
    w[tuple(slice(centre - k, centre + k + 1) for _ in range(d))] = q
    res = smallest_eigs(assemble_operator(dom, GridFunction(dom, w)), 1, tol=1e-12)
    psi = res.vectors[0].reshape(dom.shape)
    psi = psi / psi.max()
    off = w == 0
    best = 0.0
    for a in range(d):
        diff = np.abs(np.diff(psi, axis=a)) * n
        both = np.take(off, range(dom.shape[a] - 1), axis=a) & np.take(off, range(1, dom.shape[a]), axis=a)
        if both.any():
            best = max(best, float(diff[both].max()))
    return best
