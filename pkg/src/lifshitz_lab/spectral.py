"""Spectral building blocks for the lower bounds.

The module covers cell and pair energies with the induced site equivalence,
strip operators with their Dirichlet-to-Neumann map, and the column/segment
bookkeeping that feeds the bracketing chain.

Conventions: site types are 0-based indices into the catalogue; axes are
0-based with the last axis playing the role of ``x_d``. The pair operator
along axis ``j`` joins cell ``k`` at the origin with cell ``l`` at ``e_j``.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.optimize import brentq

from .eig import EigensolverError, EigenResult, smallest_eigs
from .grid import (
    INTERVAL,
    DiscreteOperator,
    GridDomain,
    GridFunction,
    assemble_operator,
    face_weights,
    reflect_double,
    restrict_circle,
    restrict_operator,
    trace_restrict,
)
from .potential import (
    AlloyConfiguration,
    BackgroundPotential,
    SingleSitePotential,
    alloy_domain,
    check_reflection_symmetry,
    realize_field,
)

log = logging.getLogger(__name__)

TOL_NUM = 1e-9
TOL_EQUIV = 1e-6


# --------------------------------------------------------------------------
# catalogue and cell energies

def _cell_operator(values: np.ndarray, background: Optional[BackgroundPotential]) -> DiscreteOperator:
    d, n = values.ndim, values.shape[0] - 1
    dom = alloy_domain((1,) * d, n)
    w = values if background is None else values + background.total
    return assemble_operator(dom, GridFunction(dom, w))


def cell_ground(values: np.ndarray, background: Optional[BackgroundPotential] = None,
                tol: float = 1e-10) -> EigenResult:
    """Ground pair of ``-Laplace + V_0 + v`` on the unit cell (Neumann)."""
    return smallest_eigs(_cell_operator(np.asarray(values, float), background), 1, tol=tol)


def normalize_zero(background: Optional[BackgroundPotential], sites: Sequence[SingleSitePotential],
                   d: Optional[int] = None, n: Optional[int] = None):
    """Shift ``V_0`` so that the lowest cell energy over the catalogue is 0.

    Returns ``(shifted background, shift)``. A missing background is treated
    as ``V_0 = 0``.
    """
    if not sites:
        raise ValueError("site catalogue is empty")
    d = sites[0].dimension if d is None else d
    n = sites[0].n if n is None else n
    if background is None:
        background = BackgroundPotential.constant(0.0, d, n)
    base = background.with_shift(0.0)
    energies = [cell_ground(s.values, base).ground_energy for s in sites]
    shift = -float(min(energies))
    return background.with_shift(shift), shift


def find_bracket(f: Callable[[float], float], lo: float, hi: float, points: int = 41):
    """First sign change of ``f`` on a geometric grid over ``[lo, hi]``."""
    grid = np.geomspace(lo, hi, points) if lo > 0 else np.linspace(lo, hi, points)
    prev_s, prev_f = grid[0], f(grid[0])
    for s in grid[1:]:
        fs = f(s)
        if np.sign(fs) != np.sign(prev_f) or fs == 0.0:
            return prev_s, s
        prev_s, prev_f = s, fs
    raise ValueError(f"no sign change of the cell energy on [{lo}, {hi}]")


def tune_zero_energy(
    build: Callable[[float], np.ndarray],
    lo: float,
    hi: float,
    background: Optional[BackgroundPotential] = None,
    xtol: float = 1e-14,
) -> tuple:
    """Parameter ``s`` with cell energy of ``build(s)`` equal to 0.

    ``build`` maps a scalar to a unit-cell sample. The first sign change on
    ``[lo, hi]`` is located on a coarse grid and refined by Brent's method.
    Returns ``(s, sample, residual energy)``.
    """
    f = lambda s: cell_ground(build(s), background).ground_energy  # noqa: E731
    a, b = find_bracket(f, lo, hi)
    s = brentq(f, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps)
    v = build(s)
    return float(s), v, float(f(s))


def build_site(preset: str, d: int, n: int, params: Optional[dict] = None,
               tune: Optional[dict] = None,
               background: Optional[BackgroundPotential] = None) -> SingleSitePotential:
    """Site from a preset, optionally tuned to zero cell energy.

    ``tune`` is ``{"param": name, "lo": float, "hi": float}``; the special
    name ``"scale"`` multiplies the whole sample. The tuned value is recorded
    in the site's ``params``.
    """
    from .potential import preset_sample

    params = dict(params or {})
    if tune is None:
        return SingleSitePotential.from_preset(preset, d, n, **params)
    name = tune.get("param", "scale")
    lo, hi = float(tune.get("lo", 0.1)), float(tune.get("hi", 10.0))
    if name == "scale":
        base = preset_sample(preset, d, n, **params)
        build = lambda s: s * base  # noqa: E731
    else:
        build = lambda s: preset_sample(preset, d, n, **{**params, name: s})  # noqa: E731
    value, _, _ = tune_zero_energy(build, lo, hi, background)
    if name == "scale":
        site = SingleSitePotential.from_preset(preset, d, n, **params).scaled(value)
        return SingleSitePotential(site.values, site.symmetry_axes, preset, {**params, "scale": value})
    return SingleSitePotential.from_preset(preset, d, n, **{**params, name: value})


@dataclass
class Catalogue:
    """Sites ``v_k`` and background ``V_0`` at one resolution, with cached solves."""

    sites: list
    background: Optional[BackgroundPotential] = None
    tol: float = 1e-10
    _cells: dict = field(default_factory=dict, init=False, repr=False)
    _pairs: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if not self.sites:
            raise ValueError("site catalogue is empty")
        shapes = {s.values.shape for s in self.sites}
        if len(shapes) != 1:
            raise ValueError("all sites must share dimension and resolution")

    @property
    def dimension(self) -> int:
        return self.sites[0].dimension

    @property
    def n(self) -> int:
        return self.sites[0].n

    def __len__(self):
        return len(self.sites)

    def normalized(self) -> "Catalogue":
        bg, _ = normalize_zero(self.background, self.sites)
        return Catalogue(list(self.sites), bg, self.tol)

    def cell(self, k: int) -> EigenResult:
        if k not in self._cells:
            self._cells[k] = cell_ground(self.sites[k].values, self.background, self.tol)
        return self._cells[k]

    def cell_energy(self, k: int) -> float:
        return self.cell(k).ground_energy

    def cell_energies(self) -> np.ndarray:
        return np.array([self.cell_energy(k) for k in range(len(self))])

    def zero_sites(self, tol_equiv: float = TOL_EQUIV) -> list:
        """Types whose cell energy is at most ``tol_equiv`` (the set ``1..m``)."""
        return [k for k, e in enumerate(self.cell_energies()) if e <= tol_equiv]

    def pair_operator(self, k: int, l: int, axis: int = -1) -> DiscreteOperator:
        d = self.dimension
        axis = axis % d
        box = [1] * d
        box[axis] = 2
        types = np.zeros(box, dtype=int)
        types[tuple(1 if a == axis else 0 for a in range(d))] = 1
        dom = alloy_domain(box, self.n)
        field_ = realize_field(self.background, [self.sites[k], self.sites[l]],
                               AlloyConfiguration(types), dom)
        return assemble_operator(dom, field_)

    def pair_energy(self, k: int, l: int, axis: int = -1) -> float:
        key = (k, l, axis % self.dimension)
        if key not in self._pairs:
            self._pairs[key] = smallest_eigs(self.pair_operator(k, l, axis), 1, tol=self.tol).ground_energy
        return self._pairs[key]

    def box_operator(self, config: AlloyConfiguration) -> DiscreteOperator:
        dom = alloy_domain(config.box, self.n)
        return assemble_operator(dom, realize_field(self.background, self.sites, config, dom))


# --------------------------------------------------------------------------
# equivalence

@dataclass(frozen=True)
class EquivalenceReport:
    axis: int
    types: tuple             # the zero-energy types (1..m), 0-based
    energies: np.ndarray     # pair energies e(k, l), indexed like ``types``
    related: np.ndarray      # e(k, l) <= tol_equiv
    classes: tuple           # connected components, as tuples of types
    violations: tuple        # (k, l, r) with k~l, l~r but not k~r
    tol_equiv: float
    gap: float               # smallest pair energy above tol_equiv (inf if none)
    cell_energies: np.ndarray

    @property
    def m(self) -> int:
        return len(self.types)

    def class_of(self, k: int) -> int:
        """Index of the class of type ``k``, or -1 when its cell energy is positive."""
        for c, members in enumerate(self.classes):
            if k in members:
                return c
        return -1

    def is_related(self, k: int, l: int) -> bool:
        if k not in self.types or l not in self.types:
            return False
        i, j = self.types.index(k), self.types.index(l)
        return bool(self.related[i, j])

    @property
    def separation(self) -> float:
        """Ratio of the smallest unrelated pair energy to the largest related one."""
        rel = self.energies[self.related]
        top = float(rel.max()) if rel.size else 0.0
        return self.gap / max(top, np.finfo(float).tiny)


def _components(related: np.ndarray) -> list:
    m = related.shape[0]
    label = -np.ones(m, dtype=int)
    comps = []
    for s in range(m):
        if label[s] >= 0:
            continue
        stack, comp = [s], []
        label[s] = len(comps)
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in np.nonzero(related[u])[0]:
                if label[v] < 0:
                    label[v] = len(comps)
                    stack.append(v)
        comps.append(sorted(comp))
    return comps


def equivalence_matrix(catalogue: Catalogue, axis: int = -1, tol_equiv: float = TOL_EQUIV,
                       threads: int = 1) -> EquivalenceReport:
    """Pair energies among the zero-energy sites and the induced relation.

    Two types are related when their pair energy is at most ``tol_equiv``.
    Classes are connected components of the relation graph; triples that
    break transitivity are reported rather than repaired.
    """
    if tol_equiv <= 0:
        raise ValueError("tol_equiv must be positive")
    axis = axis % catalogue.dimension
    types = tuple(catalogue.zero_sites(tol_equiv))
    m = len(types)
    jobs = [(i, j) for i in range(m) for j in range(m)]
    solve = lambda ij: catalogue.pair_energy(types[ij[0]], types[ij[1]], axis)  # noqa: E731
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            vals = list(pool.map(solve, jobs))
    else:
        vals = [solve(ij) for ij in jobs]
    e = np.array(vals, dtype=float).reshape(m, m)
    related = e <= tol_equiv
    comps = _components(related | related.T)
    violations = []
    for a in range(m):
        for b in range(m):
            for c in range(m):
                if len({a, b, c}) == 3 and related[a, b] and related[b, c] and not related[a, c]:
                    violations.append((types[a], types[b], types[c]))
    above = e[~related]
    gap = float(above.min()) if above.size else float("inf")
    return EquivalenceReport(
        axis, types, e, related,
        tuple(tuple(types[i] for i in comp) for comp in comps),
        tuple(violations), float(tol_equiv), gap, catalogue.cell_energies(),
    )


@dataclass(frozen=True)
class Proportionality:
    deviation: float
    mu1: float
    mu2: float


def boundary_proportionality(catalogue: Catalogue, k: int, l: int, axis: int = -1,
                             side: int = 0) -> Proportionality:
    """Best fit ``mu1 Psi_k = mu2 Psi_l`` on a cell face, in ``L^2`` of the face.

    The deviation is the relative residual ``|t_k - mu t_l| / |t_k|`` of the
    least-squares constant ``mu``; ``mu1 = 1`` and ``mu2 = mu``.
    """
    axis = axis % catalogue.dimension
    face = (axis, side)
    tk = trace_restrict(catalogue.cell(k).ground, face)
    tl = trace_restrict(catalogue.cell(l).ground, face)
    mu = tk.inner(tl) / tl.norm2()
    w = tk.weights
    res = np.sqrt(np.sum(w * (tk.values - mu * tl.values) ** 2) / tk.norm2())
    return Proportionality(float(res), 1.0, float(mu))


# --------------------------------------------------------------------------
# strips

@dataclass(frozen=True)
class StripSpec:
    """Strip ``Omega_0 u Omega_1``: a buffer of ``buffer_depth`` cells with
    potential ``buffer_potential`` below ``x_d = 0`` and the site sequence
    above it. ``marked_end`` puts a Dirichlet mark on the lower end face."""

    sequence: tuple
    buffer_depth: int = 0
    buffer_potential: float = 0.0
    marked_end: bool = False

    def __post_init__(self):
        seq = tuple(int(k) for k in self.sequence)
        if len(seq) < 1:
            raise ValueError("strip length must be >= 1")
        if any(k < 0 for k in seq):
            raise ValueError("site types are nonnegative")
        if self.buffer_depth < 0:
            raise ValueError("buffer depth must be >= 0")
        object.__setattr__(self, "sequence", seq)

    @property
    def length(self) -> int:
        return len(self.sequence)


def strip_operator(catalogue: Catalogue, spec: StripSpec) -> DiscreteOperator:
    """``P^N`` on the strip described by ``spec`` (Neumann except a marked end)."""
    d, n = catalogue.dimension, catalogue.n
    if max(spec.sequence) >= len(catalogue):
        raise ValueError("strip refers to a site type beyond the catalogue")
    upper_box = (1,) * (d - 1) + (spec.length,)
    upper = alloy_domain(upper_box, n)
    types = np.asarray(spec.sequence).reshape(upper_box)
    w1 = realize_field(catalogue.background, catalogue.sites, AlloyConfiguration(types), upper).values
    a = spec.buffer_depth
    if a:
        w0 = np.full(w1.shape[:-1] + (a * n,), float(spec.buffer_potential))
        w = np.concatenate([w0, w1], axis=-1)
    else:
        w = w1
    marked = (d - 1, 0) if spec.marked_end else None
    dom = GridDomain(upper_box[:-1] + (a + spec.length,), n, (INTERVAL,) * d, marked)
    return assemble_operator(dom, GridFunction(dom, w))


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    stderr: float
    intercept: float
    points: int


def loglog_fit(x, y) -> SlopeFit:
    """Least-squares slope of ``log y`` against ``log x`` with its standard error."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    if len(lx) < 2:
        raise ValueError("need at least two points")
    a = np.vstack([lx, np.ones_like(lx)]).T
    coef, res, *_ = np.linalg.lstsq(a, ly, rcond=None)
    dof = len(lx) - 2
    if dof > 0:
        sigma2 = float(np.sum((ly - a @ coef) ** 2)) / dof
        se = float(np.sqrt(sigma2 / np.sum((lx - lx.mean()) ** 2)))
    else:
        se = float("nan")
    return SlopeFit(float(coef[0]), se, float(coef[1]), len(lx))


@dataclass(frozen=True)
class StripScan:
    lengths: np.ndarray
    lam_min: np.ndarray          # min over sequences at each L
    lam_all: tuple               # per-L arrays over sequences
    scaled: np.ndarray           # lam_min * L^2
    fit: Optional[SlopeFit]
    c_hat: float
    spread: float
    partial: bool = False
    failures: tuple = ()

    def rows(self) -> list:
        return [
            {"L": int(L), "lambda_min": float(lam), "lambda_min_times_L2": float(s)}
            for L, lam, s in zip(self.lengths, self.lam_min, self.scaled)
        ]


def strip_scan(catalogue: Catalogue, sequences: dict, buffer_depth: int = 0,
               buffer_potential: float = 0.0, marked_end: bool = False,
               tol: float = 1e-10) -> StripScan:
    """Ground energies of strips for each ``L`` in ``sequences`` (``L -> list``).

    Reports the minimum over sequences per ``L``, its ``L^2``-scaled value,
    the log-log slope and ``c_hat = min_L min lam * L^2``. A solver failure
    stops the scan and flags the result as partial.
    """
    lengths, lam_min, lam_all, failures = [], [], [], []
    partial = False
    for L in sorted(sequences):
        vals = []
        try:
            for seq in sequences[L]:
                if len(seq) != L:
                    raise ValueError(f"sequence of length {len(seq)} listed under L={L}")
                spec = StripSpec(tuple(seq), buffer_depth, buffer_potential, marked_end)
                vals.append(smallest_eigs(strip_operator(catalogue, spec), 1, tol=tol).ground_energy)
        except EigensolverError as exc:
            failures.append((L, str(exc)))
            partial = True
            break
        lengths.append(L)
        lam_all.append(np.array(vals))
        lam_min.append(min(vals))
    lengths = np.array(lengths)
    lam_min = np.array(lam_min)
    scaled = lam_min * lengths.astype(float) ** 2
    fit = loglog_fit(lengths, lam_min) if len(lengths) >= 2 and np.all(lam_min > 0) else None
    c_hat = float(scaled.min()) if scaled.size else float("nan")
    spread = float(scaled.max() / scaled.min()) if scaled.size and scaled.min() > 0 else float("inf")
    return StripScan(lengths, lam_min, tuple(lam_all), scaled, fit, c_hat, spread, partial,
                     tuple(failures))


# --------------------------------------------------------------------------
# Dirichlet-to-Neumann map

@dataclass(frozen=True)
class DtNMatrix:
    lam: float
    matrix: np.ndarray       # symmetric representation W^{1/2} T W^{-1/2}
    weights: np.ndarray      # face quadrature weights
    eps_hat: float
    alpha_hat: float
    symmetry_residual: float

    def apply(self, g: np.ndarray) -> np.ndarray:
        """``T g`` for nodal face values ``g``."""
        s = np.sqrt(self.weights)
        return (self.matrix @ (s * g)) / s


def dtn_map(W0, depth: int, lam: float, n: int, d: int = 1, allow_boundary: bool = False) -> DtNMatrix:
    """Dirichlet-to-Neumann operator of the buffer ``[0,1]^{d-1} x [-depth, 0]``.

    For face data ``g`` on ``S = {x_d = 0}`` the discrete solution of
    ``(-Laplace + W0 - lam) psi = 0`` with Neumann conditions on the rest of
    the boundary minimizes the energy, and ``<g, T g>_{L^2(S)}`` equals that
    energy. With ``K`` the shifted stiffness this gives
    ``T = h^d W_S^{-1} (K_SS - K_SI K_II^{-1} K_IS)``, which is symmetric in
    the face inner product. Requires ``lam`` below the buffer ground energy.
    """
    dom = GridDomain((1,) * (d - 1) + (int(depth),), n, (INTERVAL,) * d)
    w = W0 if np.isscalar(W0) else GridFunction(dom, np.asarray(W0, float))
    op = assemble_operator(dom, w)
    alpha = smallest_eigs(op, 1, tol=1e-12).ground_energy
    margin = 1e-12 * max(1.0, abs(alpha))
    if lam >= alpha - margin and not (allow_boundary and lam <= alpha + margin):
        raise ValueError(f"lambda={lam} must lie below the buffer ground energy {alpha:.6g}")
    k = (op.stiffness - lam * sp.diags(op.mass)).toarray()
    face = np.zeros(dom.shape, dtype=bool)
    face[dom.face_index((d - 1, 1))] = True
    s = face.reshape(-1)
    i = ~s
    kss, ksi, kii = k[np.ix_(s, s)], k[np.ix_(s, i)], k[np.ix_(i, i)]
    try:
        c = la.cho_factor(kii)
    except la.LinAlgError as exc:
        raise EigensolverError("interior block is not positive definite") from exc
    schur = kss - ksi @ la.cho_solve(c, ksi.T)
    wf = face_weights(dom, (d - 1, 1))
    root = 1.0 / np.sqrt(wf)
    t = dom.cell_volume * (root[:, None] * schur * root[None, :])
    asym = float(np.abs(t - t.T).max() / max(np.abs(t).max(), np.finfo(float).tiny))
    t = 0.5 * (t + t.T)
    eps = float(np.linalg.eigvalsh(t)[0])
    return DtNMatrix(float(lam), t, wf, eps, float(alpha), asym)


# --------------------------------------------------------------------------
# columns and segments

@dataclass(frozen=True)
class Segment:
    start: int               # first cell on the doubled circle
    length: int              # nu + 1
    case: str                # "i" or "ii"
    types: tuple


@dataclass(frozen=True)
class ColumnClassification:
    p: tuple
    verdict: str             # "a" or "b"
    sequence: tuple
    doubled: tuple
    segments: tuple
    witness: tuple           # ("site", l) or ("pair", l, l') for (a); () for (b)


def _neq(report: EquivalenceReport, k: int, l: int) -> bool:
    return not report.is_related(k, l)


def _column_witness(seq, report):
    zero = set(report.types)
    for i, k in enumerate(seq):
        if k not in zero:
            return ("site", i)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if _neq(report, seq[i], seq[j]):
                return ("pair", i, j)
    return ()


def segment_doubled(doubled: Sequence[int], report: EquivalenceReport) -> tuple:
    """Cut the doubled circular column into case (i)/(ii) segments.

    Heads are cells holding a positive-energy site (case i) and cells whose
    zero-energy site is unrelated to the next one (case ii). Walking forward
    from a head, a segment runs to the next head; after a case (ii) head the
    following cell is part of the segment whatever it is. Every head is tried
    as the starting point until the walk closes up exactly at the start.
    """
    D = list(doubled)
    N = len(D)
    zero = set(report.types)
    case = {}
    for i in range(N):
        a, b = D[i], D[(i + 1) % N]
        if a not in zero:
            case[i] = "i"
        elif b in zero and _neq(report, a, b):
            case[i] = "ii"
    if not case:
        raise ValueError("column satisfies (b); there is nothing to segment")
    for h0 in sorted(case):
        segs, h, ok = [], h0, True
        while True:
            step = 1 if case[h % N] == "i" else 2
            q = h + step
            while q < h0 + N and (q % N) not in case:
                q += 1
            if q > h0 + N:
                ok = False
                break
            segs.append(Segment(h % N, q - h, case[h % N], tuple(D[(h + t) % N] for t in range(q - h))))
            if q == h0 + N:
                break
            h = q
        if ok:
            return tuple(segs)
    raise RuntimeError(f"no consistent segmentation of {D}")


def validate_segments(segments: Sequence[Segment], doubled: Sequence[int], report: EquivalenceReport) -> list:
    """Problems with a segmentation (empty list when it is valid)."""
    problems = []
    N = len(doubled)
    zero = set(report.types)
    covered = []
    for s in segments:
        covered.extend((s.start + t) % N for t in range(s.length))
        b = s.types
        if s.case == "i":
            tail = b[1:]
            if b[0] in zero or any(k not in zero for k in tail):
                problems.append(f"segment at {s.start}: case (i) membership")
        else:
            tail = b[2:]
            if len(b) < 2 or any(k not in zero for k in b) or not _neq(report, b[0], b[1]):
                problems.append(f"segment at {s.start}: case (ii) head")
        if any(_neq(report, x, y) for x in tail for y in tail):
            problems.append(f"segment at {s.start}: tail not mutually related")
    if sorted(covered) != list(range(N)):
        problems.append("segments do not partition the column")
    return problems


def classify_columns(config: AlloyConfiguration, report: EquivalenceReport) -> list:
    """Verdict (a)/(b) for every column along the last axis, with segments."""
    if report.axis != len(config.box) - 1:
        raise ValueError("the equivalence report must be computed along the last axis")
    out = []
    for p, seq in config.columns():
        seq = tuple(int(k) for k in seq)
        witness = _column_witness(seq, report)
        doubled = seq + seq[::-1]
        if not witness:
            out.append(ColumnClassification(tuple(p), "b", seq, doubled, (), ()))
            continue
        segs = segment_doubled(doubled, report)
        out.append(ColumnClassification(tuple(p), "a", seq, doubled, segs, witness))
    return out


# --------------------------------------------------------------------------
# bracketing chain

@dataclass(frozen=True)
class BracketingChain:
    box: float
    columns: np.ndarray          # lam_min of the column operators
    doubled: np.ndarray          # lam_min of the reflected columns
    segments: tuple              # per column, lam_min of each segment operator
    violations: tuple            # (inequality name, amount) beyond tol

    @property
    def segment_min(self) -> float:
        return float(min(min(s) for s in self.segments))

    @property
    def holds(self) -> bool:
        return not self.violations


def bracketing_chain(catalogue: Catalogue, config: AlloyConfiguration, report: EquivalenceReport,
                     tol: float = 1e-8, eig_tol: float = 1e-10) -> BracketingChain:
    """Evaluate ``box >= columns >= doubled columns >= segments`` for one sample.

    Every site must be symmetric about ``x_d = 1/2`` so that the reflected
    column is again a sequence of catalogue sites.
    """
    last = catalogue.dimension - 1
    for k in set(config.types.reshape(-1).tolist()):
        if check_reflection_symmetry(catalogue.sites[k].values, last) != 0.0:
            raise ValueError(f"site {k} is not symmetric about the last axis")
    box_op = catalogue.box_operator(config)
    lam_box = smallest_eigs(box_op, 1, tol=eig_tol).ground_energy
    cols, dbl, segs = [], [], []
    L = config.box[-1]
    for cls in classify_columns(config, report):
        lo = tuple(cls.p) + (0,)
        hi = tuple(q + 1 for q in cls.p) + (L,)
        col = restrict_operator(box_op, lo, hi)
        cols.append(smallest_eigs(col, 1, tol=eig_tol).ground_energy)
        hat = reflect_double(col)
        dbl.append(smallest_eigs(hat, 1, tol=eig_tol).ground_energy)
        if cls.verdict == "b":
            segs.append((dbl[-1],))
            continue
        segs.append(tuple(
            smallest_eigs(restrict_circle(hat, s.start, s.length), 1, tol=eig_tol).ground_energy
            for s in cls.segments
        ))
    cols, dbl = np.array(cols), np.array(dbl)
    seg_min = np.array([min(s) for s in segs])
    violations = []
    for name, upper, lower in (
        ("box>=columns", lam_box, cols.min()),
        ("columns>=doubled", cols, dbl),
        ("doubled>=segments", dbl, seg_min),
    ):
        gap = float(np.max(np.asarray(lower) - np.asarray(upper)))
        if gap > tol:
            violations.append((name, gap))
    return BracketingChain(float(lam_box), cols, dbl, tuple(segs), tuple(violations))


# --------------------------------------------------------------------------
# Poincare variant on a strip

def poincare_terms(op: DiscreteOperator, phi) -> tuple:
    """``(boundary term, gradient term, norm term)`` for the strip inequality

        (2/L) |phi|^2_{L^2(S)} + |grad phi|^2 >= |phi|^2 / L^2

    with ``S`` the lower end face ``x_d = 0`` and ``L`` the strip length.
    """
    dom = op.domain
    L = dom.cells[-1]
    g = phi if isinstance(phi, GridFunction) else GridFunction(dom, phi)
    boundary = (2.0 / L) * trace_restrict(g, (dom.dimension - 1, 0)).norm2()
    return boundary, op.gradient_energy(g), op.norm2(g) / L**2


def poincare_constant(dom: GridDomain) -> float:
    """Smallest value of the left side over unit-norm functions, times ``L^2``."""
    L = dom.cells[-1]
    op = assemble_operator(dom, 0.0)
    face = np.zeros(dom.shape)
    face[dom.face_index((dom.dimension - 1, 0))] = face_weights(dom, (dom.dimension - 1, 0)).reshape(
        face[dom.face_index((dom.dimension - 1, 0))].shape)
    robin = (2.0 / L) * face.reshape(-1) / dom.cell_volume
    k = op.laplacian + sp.diags(robin)
    lam = la.eigh(k.toarray(), np.diag(op.mass), eigvals_only=True, subset_by_index=[0, 0])[0]
    return float(lam * L**2)
