"""Square-lattice geometry: sites, bonds, plaquettes, sublattices, symmetry orbits.

Sites of an L x L lattice are indexed row-major (index = y*L + x), which fixes
the deterministic ordering that enumeration and Monte Carlo code key off.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property


class BoundaryCondition(str, Enum):
    PERIODIC = "periodic"
    OPEN = "open"

    @classmethod
    def parse(cls, text: str) -> "BoundaryCondition":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown boundary condition {text!r}; use 'periodic' or 'open'")


@dataclass(frozen=True)
class Lattice:
    """Immutable L x L square lattice with nearest-neighbour bonds.

    bonds are unordered site pairs stored as (min, max), sorted by
    (min site, direction, max site) with x-direction before y.
    plaquettes are 4-tuples (s00, s10, s11, s01) walking the elementary
    square counterclockwise from its lower-left corner; only squares whose
    four bonds all exist are stored.
    """

    L: int
    bc: BoundaryCondition
    bonds: tuple[tuple[int, int], ...]
    plaquettes: tuple[tuple[int, int, int, int], ...]

    @property
    def n_sites(self) -> int:
        return self.L * self.L

    def site_index(self, x: int, y: int) -> int:
        return y * self.L + x

    def site_xy(self, s: int) -> tuple[int, int]:
        return s % self.L, s // self.L

    def sublattice(self, s: int) -> int:
        x, y = self.site_xy(s)
        return (x + y) % 2

    @cached_property
    def sublattices(self) -> tuple[int, ...]:
        return tuple(self.sublattice(s) for s in range(self.n_sites))

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Adjacency lists, each sorted ascending."""
        adj: list[list[int]] = [[] for _ in range(self.n_sites)]
        for i, j in self.bonds:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def bond_index(self) -> dict[tuple[int, int], int]:
        return {b: k for k, b in enumerate(self.bonds)}

    def degree(self, s: int) -> int:
        return len(self.neighbors[s])

    def is_bond(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.bond_index


def build_lattice(L: int, bc: BoundaryCondition | str) -> Lattice:
    """Construct the L x L lattice; L must be even (perfect matchings exist).

    Periodic requires L >= 4: L = 2 with wraparound would duplicate edges.
    """
    bc = BoundaryCondition.parse(bc) if isinstance(bc, str) else bc
    if L < 2 or L % 2 != 0:
        raise ValueError(f"L must be a positive even integer, got {L}")
    if bc is BoundaryCondition.PERIODIC and L < 4:
        raise ValueError("periodic boundary conditions require L >= 4")

    periodic = bc is BoundaryCondition.PERIODIC
    raw: list[tuple[int, int, int]] = []  # (min site, direction, max site)
    for y in range(L):
        for x in range(L):
            s = y * L + x
            if x + 1 < L:
                t = y * L + (x + 1)
            elif periodic:
                t = y * L
            else:
                t = -1
            if t >= 0:
                raw.append((min(s, t), 0, max(s, t)))
            if y + 1 < L:
                t = (y + 1) * L + x
            elif periodic:
                t = x
            else:
                t = -1
            if t >= 0:
                raw.append((min(s, t), 1, max(s, t)))
    raw.sort()
    bonds = tuple((i, j) for i, _, j in raw)

    plaq: list[tuple[int, int, int, int]] = []
    ymax = L if periodic else L - 1
    xmax = L if periodic else L - 1
    for y in range(ymax):
        for x in range(xmax):
            xp, yp = (x + 1) % L, (y + 1) % L
            plaq.append((y * L + x, y * L + xp, yp * L + xp, yp * L + x))
    return Lattice(L=L, bc=bc, bonds=bonds, plaquettes=tuple(plaq))


def _perm_from_map(lat: Lattice, f) -> tuple[int, ...]:
    L = lat.L
    perm = [0] * lat.n_sites
    for s in range(lat.n_sites):
        x, y = s % L, s // L
        fx, fy = f(x, y)
        perm[s] = (fy % L) * L + (fx % L)
    return tuple(perm)


def symmetry_generators(lat: Lattice) -> list[tuple[int, ...]]:
    """Site permutations generating the spatial symmetry group.

    Open: the point group of the square (generated by a quarter turn and a
    mirror about the lattice center). Periodic: the same plus the two unit
    translations of the torus.
    """
    L = lat.L
    s = L - 1
    gens = [
        _perm_from_map(lat, lambda x, y: (s - y, x)),  # quarter turn
        _perm_from_map(lat, lambda x, y: (s - x, y)),  # mirror
    ]
    if lat.bc is BoundaryCondition.PERIODIC:
        gens.append(_perm_from_map(lat, lambda x, y: (x + 1, y)))
        gens.append(_perm_from_map(lat, lambda x, y: (x, y + 1)))
    return gens


def _map_bond(perm: tuple[int, ...], bond: tuple[int, int]) -> tuple[int, int]:
    a, b = perm[bond[0]], perm[bond[1]]
    return (a, b) if a < b else (b, a)


def bond_orbits(lat: Lattice) -> tuple[tuple[int, ...], ...]:
    """Partition bond indices into symmetry classes, centermost orbit first.

    Orbits are closures under the generator set; they are sorted by the
    squared distance of the bond midpoint from the lattice center (exact
    integer arithmetic: (x1+x2-(L-1))^2 + (y1+y2-(L-1))^2), ties broken by
    smallest member index. Within an orbit, bond indices are ascending.
    """
    gens = symmetry_generators(lat)
    bidx = lat.bond_index
    n_bonds = len(lat.bonds)
    orbit_of = [-1] * n_bonds
    orbits: list[list[int]] = []
    for k in range(n_bonds):
        if orbit_of[k] >= 0:
            continue
        label = len(orbits)
        stack = [k]
        orbit_of[k] = label
        members = [k]
        while stack:
            b = stack.pop()
            for g in gens:
                kk = bidx[_map_bond(g, lat.bonds[b])]
                if orbit_of[kk] < 0:
                    orbit_of[kk] = label
                    members.append(kk)
                    stack.append(kk)
        orbits.append(sorted(members))

    def center_key(members: list[int]) -> tuple[int, int]:
        c = lat.L - 1
        d4 = []
        for k in members:
            i, j = lat.bonds[k]
            x1, y1 = lat.site_xy(i)
            x2, y2 = lat.site_xy(j)
            d4.append((x1 + x2 - c) ** 2 + (y1 + y2 - c) ** 2)
        return (min(d4), members[0])

    return tuple(tuple(o) for o in sorted(orbits, key=center_key))


def _site_stabilizer(lat: Lattice, s: int) -> list[tuple[int, ...]]:
    """The point-group elements of the lattice that fix site s."""
    L = lat.L
    x0, y0 = lat.site_xy(s)
    if lat.bc is BoundaryCondition.PERIODIC:
        # all eight point operations recentered at s are torus symmetries
        a, b = x0, y0
        maps = [
            lambda x, y: (x, y),
            lambda x, y: (a - (y - b), b + (x - a)),
            lambda x, y: (2 * a - x, 2 * b - y),
            lambda x, y: (a + (y - b), b - (x - a)),
            lambda x, y: (2 * a - x, y),
            lambda x, y: (x, 2 * b - y),
            lambda x, y: (a + (y - b), b + (x - a)),
            lambda x, y: (a - (y - b), b - (x - a)),
        ]
        return [_perm_from_map(lat, f) for f in maps]
    # open: only the eight operations about the lattice center exist
    c = L - 1
    maps = [
        lambda x, y: (x, y),
        lambda x, y: (c - y, x),
        lambda x, y: (c - x, c - y),
        lambda x, y: (y, c - x),
        lambda x, y: (c - x, y),
        lambda x, y: (x, c - y),
        lambda x, y: (y, x),
        lambda x, y: (c - y, c - x),
    ]
    return [p for p in (_perm_from_map(lat, f) for f in maps) if p[s] == s]


def equivalent_neighbor_count(lat: Lattice, i: int, j: int) -> int:
    """Coordination z applicable to the pair correlator of bond (i, j).

    For each endpoint, counts the neighbours equivalent to the other endpoint
    under the symmetries fixing that site; the larger count gives the tighter
    (still valid) lower bound on the correlator, so it is returned.
    """
    if not lat.is_bond(i, j):
        raise ValueError(f"({i}, {j}) is not a bond of the lattice")
    z_i = len({p[j] for p in _site_stabilizer(lat, i)})
    z_j = len({p[i] for p in _site_stabilizer(lat, j)})
    return max(z_i, z_j)
