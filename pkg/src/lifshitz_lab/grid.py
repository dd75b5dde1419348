"""Discrete boxes, strips and reflected tori, and the finite-difference
operators ``-Laplace + W`` that live on them.

Discretization
--------------
Nodes sit at ``x = i*h`` (``h = 1/n``) measured from the lower corner of the
domain. Along an interval axis with ``l`` unit cells there are ``l*n + 1``
nodes; along a circle axis the duplicate endpoint is dropped, leaving
``l*n`` nodes. Nodes are enumerated in C order over the array shape, i.e.
lexicographically with the *last* axis varying fastest. The last axis is the
one that plays the role of ``x_d`` throughout the package.

Neumann faces are handled with mirror ghost nodes. Together with trapezoidal
node weights (1/2 per boundary axis a node sits on) this turns the discrete
problem into the symmetric generalized eigenproblem ``K phi = lam M phi``
with

* ``K`` = graph Laplacian with edge weights ``1/h**2`` (interior edges),
  ``1/(2 h**2)`` for edges lying in a boundary face, ... plus ``diag(M W)``;
* ``M`` = diagonal trapezoidal weights (1 inside, 1/2 on faces, 1/4 on edges).

Both are stored in *nodal* units; multiplying by the cell volume ``h**d``
gives the physical quadratic form ``int |grad phi|^2 + W |phi|^2`` and the
``L^2`` norm. In that form the Laplacian part of ``K`` has zero row sums and
the discrete energy is an exact graph Dirichlet form, which is what makes the
ground state transform identity exact at the discrete level.

A single face may carry a Dirichlet mark. Marked nodes are eliminated: the
eigen and counting routines work on the free block only, and eigenvectors
are extended by zero on the marked face.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

INTERVAL = "interval"
CIRCLE = "circle"


@dataclass(frozen=True)
class GridDomain:
    """A tensor grid of ``cells[a]`` unit cells per axis at resolution ``n``.

    ``marked_face`` is ``(axis, side)`` with ``side`` 0 for the lower face
    (``x_axis = 0``) and 1 for the upper face, or ``None``.
    """

    cells: tuple
    n: int
    topology: tuple
    marked_face: Optional[tuple] = None

    def __post_init__(self):
        cells = tuple(int(c) for c in self.cells)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "topology", tuple(self.topology))
        if len(cells) < 1:
            raise ValueError("dimension must be >= 1")
        if any(c < 1 for c in cells):
            raise ValueError(f"cells per axis must be >= 1, got {cells}")
        if len(self.topology) != len(cells):
            raise ValueError("one topology entry per axis is required")
        if any(t not in (INTERVAL, CIRCLE) for t in self.topology):
            raise ValueError(f"unknown topology in {self.topology}")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"resolution n must be an integer >= 2, got {self.n}")
        if (1.0 / self.n) * self.n != 1.0:
            raise ValueError(f"h*n != 1 in floating point for n={self.n}")
        if self.marked_face is not None:
            axis, side = self.marked_face
            object.__setattr__(self, "marked_face", (int(axis), int(side)))
            if not 0 <= axis < len(cells) or side not in (0, 1):
                raise ValueError(f"invalid marked face {self.marked_face}")
            if self.topology[axis] == CIRCLE:
                raise ValueError("a circle axis has no boundary face to mark")

    @property
    def dimension(self) -> int:
        return len(self.cells)

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def cell_volume(self) -> float:
        """Volume ``h**d`` of one grid cell (physical scale of nodal sums)."""
        return self.h ** self.dimension

    @property
    def shape(self) -> tuple:
        return tuple(
            c * self.n + (1 if t == INTERVAL else 0)
            for c, t in zip(self.cells, self.topology)
        )

    @property
    def num_nodes(self) -> int:
        return int(np.prod(self.shape))

    def coordinates(self, axis: int) -> np.ndarray:
        return np.arange(self.shape[axis]) * self.h

    def faces(self) -> list:
        """Boundary faces ``(axis, side)`` in lexicographic order."""
        return [
            (a, s)
            for a, t in enumerate(self.topology)
            if t == INTERVAL
            for s in (0, 1)
        ]

    def axis_weights(self, axis: int) -> np.ndarray:
        w = np.ones(self.shape[axis])
        if self.topology[axis] == INTERVAL:
            w[0] = w[-1] = 0.5
        return w

    def node_weights(self) -> np.ndarray:
        """Trapezoidal weights ``M`` (nodal units), flattened in node order."""
        w = np.ones(1)
        for a in range(self.dimension):
            w = np.multiply.outer(w, self.axis_weights(a)).reshape(-1)
        return w

    def face_index(self, face: tuple) -> tuple:
        """Numpy index selecting the nodes of ``face`` in the node array."""
        axis, side = face
        if (axis, side) not in self.faces():
            raise ValueError(f"face {face} is not a boundary face of this domain")
        idx = [slice(None)] * self.dimension
        idx[axis] = 0 if side == 0 else self.shape[axis] - 1
        return tuple(idx)

    def free_mask(self) -> np.ndarray:
        """Boolean mask (flat) of nodes that are not eliminated."""
        mask = np.ones(self.shape, dtype=bool)
        if self.marked_face is not None:
            mask[self.face_index(self.marked_face)] = False
        return mask.reshape(-1)


def build_domain(
    dimension: int,
    cells: Sequence[int],
    n: int,
    topology: Sequence[str] | str = INTERVAL,
    marked_face: Optional[tuple] = None,
) -> GridDomain:
    if isinstance(topology, str):
        topology = (topology,) * dimension
    if len(cells) != dimension:
        raise ValueError(f"expected {dimension} cell counts, got {len(cells)}")
    return GridDomain(tuple(cells), n, tuple(topology), marked_face)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Nodal values on a domain, stored as an array of the domain's shape."""

    domain: GridDomain
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size != self.domain.num_nodes:
            raise ValueError(
                f"{v.size} values for a domain with {self.domain.num_nodes} nodes"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        object.__setattr__(self, "values", v.reshape(self.domain.shape))

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def norm2(self) -> float:
        """Discrete ``||f||^2_{L^2}`` with trapezoidal weights."""
        return float(
            self.domain.cell_volume * np.dot(self.domain.node_weights(), self.flat**2)
        )


@dataclass(frozen=True)
class FaceTrace:
    """Values of a grid function on one boundary face with face quadrature."""

    face: tuple
    values: np.ndarray
    weights: np.ndarray

    def inner(self, other: "FaceTrace") -> float:
        return float(np.sum(self.weights * self.values * other.values))

    def norm2(self) -> float:
        return self.inner(self)


def _lap1d(size: int, h: float, topology: str) -> sp.csr_matrix:
    if topology == CIRCLE:
        if size < 3:
            raise ValueError("a circle axis needs at least 3 nodes")
        off = -np.ones(size)
        m = sp.diags([off[:-1], 2 * np.ones(size), off[:-1]], [-1, 0, 1], format="lil")
        m[0, size - 1] = m[size - 1, 0] = -1.0
        return (m.tocsr() / h**2).astype(float)
    main = 2 * np.ones(size)
    main[0] = main[-1] = 1.0
    off = -np.ones(size - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr") / h**2


def laplacian_matrix(domain: GridDomain) -> sp.csr_matrix:
    """Nodal stiffness of ``-Laplace`` with Neumann/periodic faces."""
    d = domain.dimension
    total = None
    for a in range(d):
        term = sp.identity(1, format="csr")
        for b in range(d):
            if b == a:
                factor = _lap1d(domain.shape[a], domain.h, domain.topology[a])
            else:
                factor = sp.diags(domain.axis_weights(b))
            term = sp.kron(term, factor, format="csr")
        total = term if total is None else total + term
    return total.tocsr()


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """``-Laplace + W`` on a domain as the pair (stiffness, mass).

    ``stiffness`` includes the potential term ``diag(mass * W)``; the
    potential-free part is kept as ``laplacian`` so gradient energies can be
    evaluated separately.
    """

    domain: GridDomain
    laplacian: sp.csr_matrix
    potential: np.ndarray
    mass: np.ndarray = field(repr=False)
    stiffness: sp.csr_matrix = field(repr=False)

    @property
    def free(self) -> np.ndarray:
        return self.domain.free_mask()

    def reduced(self):
        """(stiffness, mass) restricted to the free (non-eliminated) nodes."""
        f = self.free
        if f.all():
            return self.stiffness, self.mass
        return self.stiffness[f][:, f].tocsr(), self.mass[f]

    def symmetric_matrix(self) -> sp.csr_matrix:
        """``M^{-1/2} K M^{-1/2}`` on the free nodes (same spectrum)."""
        k, m = self.reduced()
        s = sp.diags(1.0 / np.sqrt(m))
        return (s @ k @ s).tocsr()

    def quadratic_form(self, phi) -> float:
        v = _flat(phi)
        return float(self.domain.cell_volume * v @ (self.stiffness @ v))

    def gradient_energy(self, phi) -> float:
        v = _flat(phi)
        return float(self.domain.cell_volume * v @ (self.laplacian @ v))

    def norm2(self, phi) -> float:
        v = _flat(phi)
        return float(self.domain.cell_volume * np.dot(self.mass, v * v))

    def rayleigh(self, phi) -> float:
        return self.quadratic_form(phi) / self.norm2(phi)

    def shifted(self, c: float) -> "DiscreteOperator":
        return assemble_operator(
            self.domain, GridFunction(self.domain, self.potential + c)
        )


def _flat(phi) -> np.ndarray:
    if isinstance(phi, GridFunction):
        return phi.flat
    return np.asarray(phi, dtype=float).reshape(-1)


def assemble_operator(domain: GridDomain, potential) -> DiscreteOperator:
    """Assemble ``-Laplace + W`` with Neumann (mirror ghost) faces.

    ``potential`` is a :class:`GridFunction` on ``domain`` or a scalar.
    """
    if np.isscalar(potential):
        w = np.full(domain.num_nodes, float(potential))
    else:
        if not isinstance(potential, GridFunction):
            raise TypeError("potential must be a GridFunction or a scalar")
        if potential.domain != domain:
            raise ValueError("potential lives on a different domain")
        w = potential.flat.copy()
    lap = laplacian_matrix(domain)
    mass = domain.node_weights()
    stiff = (lap + sp.diags(mass * w)).tocsr()
    stiff.sort_indices()
    w.setflags(write=False)
    return DiscreteOperator(domain, lap, w, mass, stiff)


def trace_restrict(phi: GridFunction, face: tuple) -> FaceTrace:
    """Restriction of ``phi`` to a boundary face.

    Face quadrature weights are ``h^(d-1)`` halved once for every other
    axis on whose boundary the face node sits (trapezoidal rule on the
    face). In one dimension the face is a point with weight 1.
    """
    dom = phi.domain
    idx = dom.face_index(face)
    vals = np.asarray(phi.values[idx], dtype=float)
    w = np.ones(1)
    for b in range(dom.dimension):
        if b != face[0]:
            w = np.multiply.outer(w, dom.axis_weights(b) * dom.h).reshape(-1)
    return FaceTrace(tuple(face), vals.reshape(-1), w)


def face_weights(domain: GridDomain, face: tuple) -> np.ndarray:
    return trace_restrict(GridFunction(domain, np.zeros(domain.num_nodes)), face).weights


def reflect_field(values: np.ndarray) -> np.ndarray:
    """Mirror a node array about ``x_d = 0`` onto a circle of twice the length.

    Input has ``N + 1`` nodes on the last axis, output ``2N``: entry ``j``
    holds the value at ``x_d = j h`` for ``j <= N`` and at ``x_d = (2N - j) h``
    beyond.
    """
    nd = values.shape[-1] - 1
    tail = values[..., nd - 1:0:-1]
    return np.concatenate([values, tail], axis=-1)


def reflect_double(op: DiscreteOperator) -> DiscreteOperator:
    """Extend an operator on a strip to the doubled torus along the last axis.

    The result lives on a circle of circumference ``2L`` and carries the
    reflected potential ``W(x', |x_d|)``.
    """
    dom = op.domain
    last = dom.dimension - 1
    if dom.topology[last] != INTERVAL:
        raise ValueError("the last axis must be an interval to reflect")
    if dom.marked_face is not None:
        raise ValueError("reflection of a domain with a marked face is not supported")
    doubled = GridDomain(
        dom.cells[:-1] + (2 * dom.cells[-1],),
        dom.n,
        dom.topology[:-1] + (CIRCLE,),
    )
    w = reflect_field(op.potential.reshape(dom.shape))
    return assemble_operator(doubled, GridFunction(doubled, w))


def subbox(values: np.ndarray, n: int, lo: Sequence[int], hi: Sequence[int]) -> np.ndarray:
    """Nodes of the closed cell box ``[lo, hi)`` (cell units) of an interval grid."""
    idx = tuple(slice(a * n, b * n + 1) for a, b in zip(lo, hi))
    return values[idx]


def restrict_operator(op: DiscreteOperator, lo: Sequence[int], hi: Sequence[int]) -> DiscreteOperator:
    """Neumann restriction of ``op`` to a sub-box of cells (interval axes only).

    The potential is cut from the parent, so bracketing inequalities between
    parent and pieces hold exactly at the discrete level.
    """
    dom = op.domain
    if CIRCLE in dom.topology:
        raise ValueError("sub-box restriction needs interval topology on every axis")
    cells = tuple(b - a for a, b in zip(lo, hi))
    sub = GridDomain(cells, dom.n, (INTERVAL,) * dom.dimension)
    w = subbox(op.potential.reshape(dom.shape), dom.n, lo, hi)
    return assemble_operator(sub, GridFunction(sub, w))


def restrict_circle(op: DiscreteOperator, start: int, cells: int) -> DiscreteOperator:
    """Neumann restriction of a circle-topology last axis to ``cells`` cells.

    The window starts at cell ``start`` and may wrap around the seam; the
    result lives on an interval domain of the same cross-section.
    """
    dom = op.domain
    last = dom.dimension - 1
    if dom.topology[last] != CIRCLE:
        raise ValueError("the last axis must be a circle")
    if not 1 <= cells <= dom.cells[last]:
        raise ValueError(f"window of {cells} cells does not fit the circle")
    size = dom.shape[last]
    idx = (start * dom.n + np.arange(cells * dom.n + 1)) % size
    w = np.take(op.potential.reshape(dom.shape), idx, axis=last)
    sub = GridDomain(dom.cells[:-1] + (cells,), dom.n, dom.topology[:-1] + (INTERVAL,))
    return assemble_operator(sub, GridFunction(sub, w))
