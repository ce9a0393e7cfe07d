"""Valence-bond configurations: matchings, transition-graph loops, overlaps.

Every dimer is implicitly oriented from sublattice A to B, so overlaps of VB
states are positive powers of two and no sign bookkeeping is needed anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

from .lattice import Lattice


class CoveringKind(str, Enum):
    NEAREST_NEIGHBOUR = "nn"
    FULL_BIPARTITE = "bipartite"


@dataclass(frozen=True)
class DimerCovering:
    """A perfect matching, stored as the involution site -> partner."""

    match: tuple[int, ...]
    kind: CoveringKind

    @property
    def n_sites(self) -> int:
        return len(self.match)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[int, int]], n_sites: int,
                   kind: CoveringKind = CoveringKind.FULL_BIPARTITE) -> "DimerCovering":
        match = [-1] * n_sites
        for i, j in pairs:
            if match[i] >= 0 or match[j] >= 0 or i == j:
                raise ValueError(f"pair ({i}, {j}) clashes with an earlier pair")
            match[i], match[j] = j, i
        if any(m < 0 for m in match):
            raise ValueError("pairs do not cover every site")
        return cls(match=tuple(match), kind=kind)

    def validate(self, sublattice: Sequence[int], lattice: Lattice | None = None) -> None:
        """Check the matching invariants; lattice required for NN coverings."""
        m = self.match
        n = len(m)
        for s in range(n):
            if not 0 <= m[s] < n or m[s] == s or m[m[s]] != s:
                raise ValueError(f"match is not a fixed-point-free involution at site {s}")
            if sublattice[s] == sublattice[m[s]]:
                raise ValueError(f"dimer ({s}, {m[s]}) joins equal sublattices")
        if self.kind is CoveringKind.NEAREST_NEIGHBOUR:
            if lattice is None:
                raise ValueError("NN covering validation needs the lattice")
            for s in range(n):
                if s < m[s] and not lattice.is_bond(s, m[s]):
                    raise ValueError(f"dimer ({s}, {m[s]}) is not a lattice bond")

    def pairs(self) -> list[tuple[int, int]]:
        return [(s, self.match[s]) for s in range(len(self.match)) if s < self.match[s]]


@dataclass(frozen=True)
class LoopDecomposition:
    """Loops of the transition graph of two matchings.

    Labels run 0..n_loops-1 in order of each loop's smallest site;
    loop_lengths[k] is the site count of loop k.
    """

    n_loops: int
    loop_id: tuple[int, ...]
    loop_lengths: tuple[int, ...]

    @property
    def n_sites(self) -> int:
        return len(self.loop_id)


@dataclass(frozen=True)
class OverlapWeight:
    """log2 of the (always positive) overlap <a|b> = 2^(N_loops - N_dimers)."""

    log2_weight: int

    @property
    def value(self) -> Fraction:
        return Fraction(2) ** self.log2_weight


def decompose_matches(match_a: Sequence[int], match_b: Sequence[int]) -> tuple[list[int], list[int]]:
    """Core loop traversal over two matchings; returns (loop_id, loop_lengths).

    Follows match_a then match_b alternately; a dimer shared by both matchings
    closes a length-2 loop. Labels are assigned in order of smallest site.
    """
    n = len(match_a)
    loop_id = [-1] * n
    lengths: list[int] = []
    for s in range(n):
        if loop_id[s] >= 0:
            continue
        label = len(lengths)
        size = 0
        cur = s
        while loop_id[cur] < 0:
            loop_id[cur] = label
            nxt = match_a[cur]
            loop_id[nxt] = label
            cur = match_b[nxt]
            size += 2
        lengths.append(size)
    return loop_id, lengths


def transition_graph(a: DimerCovering, b: DimerCovering) -> LoopDecomposition:
    """Decompose the union of two matchings on the same sites into loops."""
    if a.n_sites != b.n_sites:
        raise ValueError(f"site counts differ: {a.n_sites} vs {b.n_sites}")
    loop_id, lengths = decompose_matches(a.match, b.match)
    return LoopDecomposition(n_loops=len(lengths), loop_id=tuple(loop_id),
                             loop_lengths=tuple(lengths))


def overlap_weight(loops: LoopDecomposition, n_sites: int) -> OverlapWeight:
    if n_sites % 2 != 0 or sum(loops.loop_lengths) != n_sites:
        raise ValueError(f"n_sites={n_sites} inconsistent with loop lengths {loops.loop_lengths}")
    return OverlapWeight(log2_weight=loops.n_loops - n_sites // 2)


def loop_estimator(loops: LoopDecomposition, i: int, j: int,
                   sublattice: Sequence[int]) -> Fraction:
    """Loop rule for <a|S_i.S_j|b>/<a|b>: 0 across loops, +-3/4 within one.

    Within a loop the sign follows the sublattices: +3/4 for equal labels,
    -3/4 for opposite. Pinned against the statevector oracle in the tests.
    """
    if i == j:
        raise ValueError("spin correlator needs two distinct sites")
    if loops.loop_id[i] != loops.loop_id[j]:
        return Fraction(0)
    return Fraction(3, 4) if sublattice[i] == sublattice[j] else Fraction(-3, 4)
