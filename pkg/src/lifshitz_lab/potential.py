"""Single-site catalogues and random configurations, realized as potential fields.

Single sites and the background are stored as samples on the unit-cell grid
``(n+1)^d`` (axis order as in :mod:`lifshitz_lab.grid`), never as closures,
so equality and reflection checks are exact on the nodes.

A lattice field assigns every node to the cell that owns it. Cells own their
lower-closed faces; the upper faces of the outermost cells belong to those
cells. Writing closed cell blocks in lexicographic order realizes exactly this
convention, which is what :func:`realize_field` does (vectorized).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .grid import GridDomain, GridFunction, INTERVAL


# --------------------------------------------------------------------------
# closed-form presets

def _unit_grid(d: int, n: int):
    # centred coordinates t = x - 1/2, exactly antisymmetric under reflection
    t = (2 * np.arange(n + 1) - n) / (2 * n)
    return np.meshgrid(*([t] * d), indexing="ij")


def _cos_power_bump(t, radius, power):
    u = np.pi * t / (2 * radius)
    return np.where(np.abs(t) < radius, np.cos(u) ** power, 0.0)


def _bump(xs, radius, power=2, center=None):
    center = [0.0] * len(xs) if center is None else center
    out = np.ones_like(xs[0])
    for x, c in zip(xs, center):
        out = out * _cos_power_bump(x - c, radius, power)
    return out


def _gs_bump(xs, c, radius):
    # Psi = 1 + c prod g(x_j - 1/2), g = cos^4; returns Laplace(Psi) / Psi
    k = np.pi / (2 * radius)
    gs, g2s = [], []
    for t in xs:
        inside = np.abs(t) < radius
        u = k * t
        cu, su = np.cos(u), np.sin(u)
        gs.append(np.where(inside, cu**4, 0.0))
        g2s.append(np.where(inside, k**2 * (12 * cu**2 * su**2 - 4 * cu**4), 0.0))
    lap = np.zeros_like(xs[0])
    for j in range(len(xs)):
        term = g2s[j]
        for i in range(len(xs)):
            if i != j:
                term = term * gs[i]
        lap = lap + term
    psi = 1 + c * np.prod(gs, axis=0)
    return c * lap / psi


PRESETS = {}


def _preset(name):
    def deco(fn):
        PRESETS[name] = fn
        return fn
    return deco


@_preset("zero")
def _zero(xs):
    return np.zeros_like(xs[0])


@_preset("constant")
def _constant(xs, value=1.0):
    return np.full_like(xs[0], float(value))


@_preset("cosine_bump")
def _cosine_bump(xs, amplitude=1.0, radius=0.4):
    return amplitude * _bump(xs, radius)


@_preset("square_well")
def _square_well(xs, depth=1.0, radius=0.25):
    inside = np.ones_like(xs[0], dtype=bool)
    for x in xs:
        inside &= np.abs(x) <= radius + 1e-12
    return np.where(inside, -float(depth), 0.0)


@_preset("mirrored_dipole")
def _mirrored_dipole(xs, amplitude=1.0, axis=-1, offset=0.2, radius=0.15):
    axis = axis % len(xs)
    lo = [0.0] * len(xs)
    hi = [0.0] * len(xs)
    lo[axis] -= offset
    hi[axis] += offset
    return amplitude * (_bump(xs, radius, center=lo) - _bump(xs, radius, center=hi))


@_preset("ground_state_bump")
def _ground_state_bump(xs, c=0.5, radius=0.35):
    """``Laplace(Psi)/Psi`` for ``Psi = 1 + c*bump``: zero energy, Psi = 1 on faces."""
    return _gs_bump(xs, c, radius)


@_preset("face_cosine")
def _face_cosine(xs, c=0.3, axis=0):
    """Zero-energy site with ground state ``1 + c cos(2 pi x_axis)``."""
    # cos(2 pi x) = -cos(2 pi t) with t = x - 1/2
    cs = -np.cos(2 * np.pi * xs[axis % len(xs)])
    return -4 * np.pi**2 * c * cs / (1 + c * cs)


@_preset("sign_indefinite")
def _sign_indefinite(xs, amplitude=1.0, outer=0.45, inner=0.15, core=2.0):
    """Positive shell around a negative core; vanishes on the faces."""
    return amplitude * (_bump(xs, outer) - core * _bump(xs, inner))


@_preset("lopsided_dipole")
def _lopsided_dipole(xs, depth=10.0, barrier=1.0, offset=0.25, radius=0.2, axis=0):
    """Well at ``-offset`` and barrier at ``+offset`` along ``axis``, centred otherwise."""
    axis = axis % len(xs)
    lo = [0.0] * len(xs)
    hi = [0.0] * len(xs)
    lo[axis] -= offset
    hi[axis] += offset
    return barrier * _bump(xs, radius, center=hi) - depth * _bump(xs, radius, center=lo)


def preset_sample(name: str, d: int, n: int, **params) -> np.ndarray:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; known: {sorted(PRESETS)}")
    return np.asarray(PRESETS[name](_unit_grid(d, n), **params), dtype=float)


# --------------------------------------------------------------------------
# types

def check_reflection_symmetry(sample: np.ndarray, axis: int) -> float:
    """``max |f(x) - f(reflect_axis x)|`` over the unit-cell nodes."""
    sample = np.asarray(sample, dtype=float)
    return float(np.max(np.abs(sample - np.flip(sample, axis=axis))))


@dataclass(frozen=True, eq=False)
class SingleSitePotential:
    """A site ``v_k`` sampled on the unit cell; ``symmetry_axes`` are declared."""

    values: np.ndarray
    symmetry_axes: tuple = ()
    name: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim < 1 or len(set(v.shape)) != 1 or v.shape[0] < 3:
            raise ValueError(f"site sample must be (n+1)^d with n >= 2, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("site values must be finite")
        for a in self.symmetry_axes:
            dev = check_reflection_symmetry(v, a)
            if dev != 0.0:
                raise ValueError(f"declared symmetric about axis {a} but deviation is {dev:.3e}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "symmetry_axes", tuple(self.symmetry_axes))

    @property
    def dimension(self) -> int:
        return self.values.ndim

    @property
    def n(self) -> int:
        return self.values.shape[0] - 1

    @classmethod
    def from_preset(cls, name: str, d: int, n: int, **params) -> "SingleSitePotential":
        v = preset_sample(name, d, n, **params)
        axes = tuple(a for a in range(d) if check_reflection_symmetry(v, a) == 0.0)
        return cls(v, axes, name, dict(params))

    def reflected(self, axis: int) -> "SingleSitePotential":
        v = np.flip(self.values, axis=axis)
        axes = tuple(a for a in range(self.dimension) if check_reflection_symmetry(v, a) == 0.0)
        return SingleSitePotential(v, axes, f"{self.name}~r{axis}", self.params)

    def scaled(self, factor: float) -> "SingleSitePotential":
        return SingleSitePotential(factor * self.values, self.symmetry_axes, self.name, self.params)

    def __eq__(self, other):
        return isinstance(other, SingleSitePotential) and np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class BackgroundPotential:
    """Periodic background ``V_0`` on the unit cell plus a normalization shift."""

    values: np.ndarray
    symmetry_axes: tuple = ()
    shift: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        for a in range(v.ndim):
            lo = np.take(v, 0, axis=a)
            hi = np.take(v, -1, axis=a)
            if not np.array_equal(lo, hi):
                raise ValueError(f"background faces do not match along axis {a}")
        for a in self.symmetry_axes:
            if check_reflection_symmetry(v, a) != 0.0:
                raise ValueError(f"background not symmetric about axis {a}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, value: float, d: int, n: int) -> "BackgroundPotential":
        return cls(np.full((n + 1,) * d, float(value)), tuple(range(d)))

    @property
    def total(self) -> np.ndarray:
        return self.values + self.shift

    def with_shift(self, shift: float) -> "BackgroundPotential":
        return BackgroundPotential(self.values, self.symmetry_axes, float(shift))


@dataclass(frozen=True)
class SiteDistribution:
    probabilities: tuple

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or len(p) == 0 or np.any(p < 0) or not np.isclose(p.sum(), 1.0, atol=1e-12):
            raise ValueError(f"invalid probability vector {self.probabilities}")
        object.__setattr__(self, "probabilities", tuple(float(x) for x in p))

    @property
    def p(self) -> np.ndarray:
        return np.asarray(self.probabilities)

    def __len__(self):
        return len(self.probabilities)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent generator stream for one Monte Carlo trial."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


@dataclass(frozen=True, eq=False)
class AlloyConfiguration:
    """Site types ``omega(gamma)`` (0-based) on the box ``Z_L``."""

    types: np.ndarray
    seed: Optional[int] = None
    trial: Optional[int] = None

    def __post_init__(self):
        t = np.array(self.types, dtype=np.int64)
        if np.any(t < 0):
            raise ValueError("site types must be nonnegative")
        t.setflags(write=False)
        object.__setattr__(self, "types", t)

    @property
    def box(self) -> tuple:
        return self.types.shape

    def columns(self):
        """Yield ``(p, sequence)`` for every column along the last axis."""
        lead = self.types.shape[:-1]
        for p in itertools.product(*(range(s) for s in lead)):
            yield p, self.types[p]


def sample_alloy(dist: SiteDistribution, box: Sequence[int], seed: int, trial: int = 0) -> AlloyConfiguration:
    rng = trial_rng(seed, trial)
    types = rng.choice(len(dist), size=tuple(box), p=dist.p)
    return AlloyConfiguration(types, seed, trial)


@dataclass(frozen=True, eq=False)
class CouplingConfiguration:
    couplings: np.ndarray
    a: float
    b: float

    def __post_init__(self):
        w = np.array(self.couplings, dtype=float)
        if self.a > self.b:
            raise ValueError("need a <= b")
        if np.any(w < self.a) or np.any(w > self.b):
            raise ValueError("couplings outside [a, b]")
        w.setflags(write=False)
        object.__setattr__(self, "couplings", w)

    @property
    def box(self) -> tuple:
        return self.couplings.shape


@dataclass(frozen=True, eq=False)
class DisplacementModel:
    """Bump ``q`` on ``[-delta, delta]^d`` and admissible displacements.

    ``displacements`` are integer node offsets (multiples of ``h``) of the
    bump centre inside the unit cell.
    """

    q: np.ndarray
    n: int
    delta_nodes: int
    displacements: tuple = ()
    probabilities: Optional[tuple] = None

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        d = q.ndim
        if q.shape != (2 * self.delta_nodes + 1,) * d:
            raise ValueError("q must be sampled on the (2 delta n + 1)^d grid")
        if not 0 < self.delta_nodes < self.n / 2:
            raise ValueError("delta must lie in (0, 1/2)")
        for a in range(d):
            if check_reflection_symmetry(q, a) != 0.0:
                raise ValueError(f"q is not symmetric about x_{a} = 0")
        disp = tuple(tuple(int(t) for t in th) for th in (self.displacements or self.corner_set_nodes(d)))
        lo, hi = self.delta_nodes, self.n - self.delta_nodes
        for th in disp:
            if len(th) != d or any(not lo <= t <= hi for t in th):
                raise ValueError(f"displacement {th} outside [delta, 1-delta]^d")
        if not set(self.corner_set_nodes(d)) <= set(disp):
            raise ValueError("displacement set must contain the corner set")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "displacements", disp)

    @property
    def delta(self) -> float:
        return self.delta_nodes / self.n

    @property
    def dimension(self) -> int:
        return self.q.ndim

    def corner_set_nodes(self, d: Optional[int] = None) -> tuple:
        d = self.dimension if d is None else d
        ends = (self.delta_nodes, self.n - self.delta_nodes)
        return tuple(itertools.product(ends, repeat=d))

    def site(self, theta: Sequence[int]) -> SingleSitePotential:
        """``q(x - theta)`` as a unit-cell sample; raises if it leaves the cell."""
        d = self.dimension
        out = np.zeros((self.n + 1,) * d)
        idx = []
        for t in theta:
            lo = int(t) - self.delta_nodes
            hi = int(t) + self.delta_nodes + 1
            if lo < 0 or hi > self.n + 1:
                raise ValueError(f"displacement {tuple(theta)} moves q outside the cell")
            idx.append(slice(lo, hi))
        out[tuple(idx)] = self.q
        return SingleSitePotential(out, name=f"q@{tuple(theta)}")

    def catalogue(self) -> list:
        return [self.site(th) for th in self.displacements]


def displacement_bump(d: int, n: int, delta_nodes: int, depth: float = 1.0) -> np.ndarray:
    """Attractive ``-depth * prod cos^2`` bump sampled on ``[-delta, delta]^d``."""
    t = np.arange(-delta_nodes, delta_nodes + 1) / n
    r = delta_nodes / n
    g = _cos_power_bump(t, r, 2)
    out = np.ones(1)
    for _ in range(d):
        out = np.multiply.outer(out, g).reshape(-1)
    return -depth * out.reshape((2 * delta_nodes + 1,) * d)


# --------------------------------------------------------------------------
# realization

def _cell_local_index(domain: GridDomain):
    """Per-axis (cell index, local node index) for every node."""
    cells, local = [], []
    for a in range(domain.dimension):
        i = np.arange(domain.shape[a])
        c = np.minimum(i // domain.n, domain.cells[a] - 1)
        cells.append(c)
        local.append(i - c * domain.n)
    return cells, local


def periodize(sample: np.ndarray, domain: GridDomain) -> np.ndarray:
    """Periodic extension of a unit-cell sample over the domain's nodes."""
    _, local = _cell_local_index(domain)
    return np.asarray(sample)[np.ix_(*local)]


def realize_field(
    background: Optional[BackgroundPotential],
    sites: Sequence[SingleSitePotential],
    config,
    domain: GridDomain,
) -> GridFunction:
    """Potential ``V_0 + sum_gamma v_{omega(gamma)}(x - gamma)`` on ``domain``.

    ``config`` is an :class:`AlloyConfiguration` (``sites`` indexed by type)
    or a :class:`CouplingConfiguration` (``sites`` holds the single ``V``,
    scaled per cell by ``omega_gamma``).
    """
    n = domain.n
    for s in sites:
        if s.n != n or s.dimension != domain.dimension:
            raise ValueError("site resolution/dimension does not match the domain")
    if background is not None and background.values.shape != (n + 1,) * domain.dimension:
        raise ValueError("background resolution does not match the domain")
    if tuple(config.box) != tuple(domain.cells):
        raise ValueError(f"configuration box {config.box} != domain cells {domain.cells}")
    cells, local = _cell_local_index(domain)
    cidx = np.ix_(*cells)
    lidx = np.ix_(*local)
    if isinstance(config, AlloyConfiguration):
        if config.types.max() >= len(sites):
            raise ValueError("configuration refers to a site type beyond the catalogue")
        stack = np.stack([s.values for s in sites])
        values = stack[(config.types[cidx],) + lidx]
    elif isinstance(config, CouplingConfiguration):
        if len(sites) != 1:
            raise ValueError("a coupling model takes exactly one single-site potential")
        values = config.couplings[cidx] * sites[0].values[lidx]
    else:
        raise TypeError(f"unsupported configuration {type(config).__name__}")
    if background is not None:
        values = values + background.total[lidx]
    return GridFunction(domain, values)


def realize_displacement(model: DisplacementModel, thetas: np.ndarray, domain: GridDomain) -> GridFunction:
    """``sum_gamma q(x - gamma - theta(gamma))``; ``thetas`` has shape ``box + (d,)``."""
    thetas = np.asarray(thetas, dtype=int)
    box = thetas.shape[:-1]
    uniq, inv = np.unique(thetas.reshape(-1, thetas.shape[-1]), axis=0, return_inverse=True)
    sites = [model.site(t) for t in uniq]
    config = AlloyConfiguration(inv.reshape(box))
    return realize_field(None, sites, config, domain)


def alloy_domain(box: Sequence[int], n: int) -> GridDomain:
    return GridDomain(tuple(box), n, (INTERVAL,) * len(box))


# --------------------------------------------------------------------------
# plain-text unit-cell samples

def save_sample(path, sample: np.ndarray) -> None:
    """Header ``d n``, then nodal values row-major, one last-axis row per line."""
    sample = np.asarray(sample, dtype=float)
    d, n = sample.ndim, sample.shape[0] - 1
    rows = sample.reshape(-1, sample.shape[-1])
    with open(path, "w") as fh:
        fh.write(f"{d} {n}\n")
        np.savetxt(fh, rows, fmt="%.17g")


def load_sample(path) -> np.ndarray:
    with open(path) as fh:
        d, n = (int(t) for t in fh.readline().split())
        data = np.loadtxt(fh, ndmin=2)
    return data.reshape((n + 1,) * d)
