"""Exhaustive engines: covering enumeration, exact correlator sums, oracles.

All ensemble sums run in exact integer/rational arithmetic (pair weights are
powers of two, estimators are quarters); decimals are produced only at print
time with explicit rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Sequence

from .lattice import BoundaryCondition, Lattice, build_lattice
from .vbstate import CoveringKind, DimerCovering, decompose_matches

MAX_ENUM_L_PERIODIC = 6
MAX_ENUM_L_OPEN = 8
MAX_GAS_N = 6
MAX_ORACLE_SITES = 10


class SizeLimitError(RuntimeError):
    """Raised when a request exceeds the exhaustive-computation guards."""


class Ensemble(str, Enum):
    NN_LIQUID = "nn_liquid"
    BIPARTITE_GAS = "bipartite_gas"


@dataclass(frozen=True)
class EnumerationResult:
    coverings: tuple[DimerCovering, ...]
    count: int
    label: str


@dataclass(frozen=True)
class ExactCorrelator:
    value: Fraction
    pair: tuple[int, int]
    ensemble: Ensemble


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def enumerate_nn_coverings(lat: Lattice) -> EnumerationResult:
    """All perfect matchings of the lattice by NN bonds, in deterministic order.

    Backtracks on the lowest-index unmatched site, trying partners in
    ascending site order.
    """
    limit = MAX_ENUM_L_PERIODIC if lat.bc is BoundaryCondition.PERIODIC else MAX_ENUM_L_OPEN
    if lat.L > limit:
        raise SizeLimitError(
            f"enumeration refused for L={lat.L} {lat.bc.value} (limit L<={limit})")
    n = lat.n_sites
    nbrs = lat.neighbors
    match = [-1] * n
    out: list[tuple[int, ...]] = []

    def extend(pos: int) -> None:
        while pos < n and match[pos] >= 0:
            pos += 1
        if pos == n:
            out.append(tuple(match))
            return
        for t in nbrs[pos]:
            if match[t] < 0:
                match[pos], match[t] = t, pos
                extend(pos + 1)
                match[pos], match[t] = -1, -1

    extend(0)
    coverings = tuple(DimerCovering(match=m, kind=CoveringKind.NEAREST_NEIGHBOUR) for m in out)
    return EnumerationResult(coverings=coverings, count=len(coverings),
                             label=f"nn:L={lat.L}:{lat.bc.value}")


@lru_cache(maxsize=8)
def _cached_nn_matches(L: int, bc: BoundaryCondition) -> tuple[tuple[int, ...], ...]:
    res = enumerate_nn_coverings(build_lattice(L, bc))
    return tuple(c.match for c in res.coverings)


def enumerate_bipartite_pairings(N: int) -> EnumerationResult:
    """All N! matchings of N A-sites (0..N-1) to N B-sites (N..2N-1)."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if N > MAX_GAS_N:
        raise SizeLimitError(f"bipartite pairing enumeration limited to N <= {MAX_GAS_N}, got {N}")
    out = []
    for perm in permutations(range(N)):
        match = [0] * (2 * N)
        for i, p in enumerate(perm):
            match[i] = N + p
            match[N + p] = i
        out.append(DimerCovering(match=tuple(match), kind=CoveringKind.FULL_BIPARTITE))
    return EnumerationResult(coverings=tuple(out), count=len(out), label=f"gas:N={N}")


# ---------------------------------------------------------------------------
# transfer-matrix covering count (independent of the backtracking enumerator)
# ---------------------------------------------------------------------------

def _row_transitions(L: int, pre_occupied: int) -> list[tuple[int, int]]:
    """(in_mask, out_mask) pairs fillable in one row of width L, no wrap bond.

    in_mask marks sites already taken by vertical dimers from the row below;
    pre_occupied marks sites consumed by a wrap dimer. Free sites either pair
    horizontally with their right neighbour or send a vertical dimer up
    (setting the out bit).
    """
    results: list[tuple[int, int]] = []

    for in_mask in range(1 << L):
        if in_mask & pre_occupied:
            continue

        def fill(col: int, pending: bool, out_mask: int) -> None:
            if col == L:
                if not pending:
                    results.append((in_mask, out_mask))
                return
            taken = (in_mask >> col) & 1 or (pre_occupied >> col) & 1
            if pending:
                if not taken:
                    fill(col + 1, False, out_mask)
                return
            if taken:
                fill(col + 1, False, out_mask)
                return
            fill(col + 1, False, out_mask | (1 << col))  # vertical up
            fill(col + 1, True, out_mask)                # horizontal right

        fill(0, False, 0)
    return results


@lru_cache(maxsize=32)
def count_coverings_transfer_matrix(L: int, bc: BoundaryCondition | str) -> int:
    """Count NN perfect matchings via row-by-row transfer over protrusion masks."""
    bc = BoundaryCondition.parse(bc) if isinstance(bc, str) else bc
    if L < 2 or L % 2 != 0:
        raise ValueError(f"L must be a positive even integer, got {L}")
    if bc is BoundaryCondition.PERIODIC and L < 4:
        raise ValueError("periodic boundary conditions require L >= 4")
    size = 1 << L

    if bc is BoundaryCondition.OPEN:
        trans = _row_transitions(L, 0)
        by_in: list[list[int]] = [[] for _ in range(size)]
        for m, o in trans:
            by_in[m].append(o)
        vec = [0] * size
        vec[0] = 1
        for _ in range(L):
            new = [0] * size
            for m, v in enumerate(vec):
                if v:
                    for o in by_in[m]:
                        new[o] += v
            vec = new
        return vec[0]

    # periodic: rows may also use the wrap bond (cols L-1 and 0); vertical
    # wrap means the answer is the trace of the L-th power of the transfer matrix
    trans = _row_transitions(L, 0) + _row_transitions(L, (1 << (L - 1)) | 1)
    T = [[0] * size for _ in range(size)]
    for m, o in trans:
        T[m][o] += 1
    P = [[1 if i == j else 0 for j in range(size)] for i in range(size)]
    for _ in range(L):
        P = [[sum(P[i][k] * T[k][j] for k in range(size) if P[i][k]) for j in range(size)]
             for i in range(size)]
    return sum(P[i][i] for i in range(size))


# ---------------------------------------------------------------------------
# exact weighted double sums
# ---------------------------------------------------------------------------

def weighted_pair_sums(matches: Sequence[Sequence[int]],
                       rep_pairs: Sequence[tuple[int, int]],
                       sublattice: Sequence[int]) -> tuple[int, list[int]]:
    """Accumulate Z = sum over covering pairs of 2^N_loops and, per site pair,
    A = sum of (+-)2^N_loops restricted to configurations where the two sites
    share a loop (sign + for equal sublattices, - for opposite).

    The correlator is then (3/4) * A / Z. Integers only; exact by construction.
    """
    n = len(sublattice)
    reps = [(i, j, 1 if sublattice[i] == sublattice[j] else -1) for i, j in rep_pairs]
    z_acc = 0
    pair_acc = [0] * len(reps)
    for ma in matches:
        for mb in matches:
            lid = [-1] * n
            nl = 0
            for s in range(n):
                if lid[s] >= 0:
                    continue
                nl += 1
                cur = s
                while lid[cur] < 0:
                    lid[cur] = s
                    nxt = ma[cur]
                    lid[nxt] = s
                    cur = mb[nxt]
            w = 1 << nl
            z_acc += w
            for k, (i, j, sgn) in enumerate(reps):
                if lid[i] == lid[j]:
                    pair_acc[k] += sgn * w
    return z_acc, pair_acc


def exact_nn_correlators(lat: Lattice,
                         pairs: Sequence[tuple[int, int]]) -> dict[tuple[int, int], Fraction]:
    """Exact <S_i.S_j> for several site pairs of the NN-covering superposition."""
    matches = _cached_nn_matches(lat.L, lat.bc)
    z, acc = weighted_pair_sums(matches, pairs, lat.sublattices)
    return {p: Fraction(3 * a, 4 * z) for p, a in zip(pairs, acc)}


def exact_nn_correlator(lat: Lattice, i: int, j: int) -> ExactCorrelator:
    if i == j:
        raise ValueError("spin correlator needs two distinct sites")
    value = exact_nn_correlators(lat, [(i, j)])[(i, j)]
    return ExactCorrelator(value=value, pair=(i, j), ensemble=Ensemble.NN_LIQUID)


def exact_gas_correlator(N: int, same_sublattice: bool) -> ExactCorrelator:
    """Exact <S_i.S_j> in the equal-amplitude superposition of all N! pairings."""
    if same_sublattice and N < 2:
        raise ValueError("a same-sublattice pair needs N >= 2")
    res = enumerate_bipartite_pairings(N)
    pair = (0, 1) if same_sublattice else (0, N)
    sub = [0] * N + [1] * N
    z, acc = weighted_pair_sums([c.match for c in res.coverings], [pair], sub)
    return ExactCorrelator(value=Fraction(3 * acc[0], 4 * z), pair=pair,
                           ensemble=Ensemble.BIPARTITE_GAS)


# ---------------------------------------------------------------------------
# statevector oracle (independent ground truth for loops/overlaps/estimators)
# ---------------------------------------------------------------------------

def vb_vector(match: Sequence[int], sublattice: Sequence[int]) -> list[int]:
    """Integer amplitudes of a VB product state, basis bit s = spin-up at s.

    The true state is this vector times 2^(-n_dimers/2); each dimer is the
    singlet |up_A down_B> - |down_A up_B> oriented from sublattice A to B.
    """
    n = len(match)
    if n > MAX_ORACLE_SITES:
        raise SizeLimitError(f"statevector oracle limited to {MAX_ORACLE_SITES} sites, got {n}")
    dimers = []
    for s in range(n):
        t = match[s]
        if s < t:
            dimers.append((s, t) if sublattice[s] == 0 else (t, s))
    vec = [0] * (1 << n)
    for b in range(1 << n):
        amp = 1
        for a, c in dimers:
            ba = (b >> a) & 1
            bc = (b >> c) & 1
            if ba == 1 and bc == 0:
                continue
            if ba == 0 and bc == 1:
                amp = -amp
            else:
                amp = 0
                break
        vec[b] = amp
    return vec


def superposition_vector(matches: Sequence[Sequence[int]],
                         sublattice: Sequence[int]) -> list[int]:
    vecs = [vb_vector(m, sublattice) for m in matches]
    return [sum(col) for col in zip(*vecs)]


def sv_inner_raw(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(u, v))


def sv_overlap(u: Sequence[int], v: Sequence[int], n_sites: int) -> Fraction:
    """Normalized overlap of two integer-amplitude VB vectors."""
    return Fraction(sv_inner_raw(u, v), 1 << (n_sites // 2))


def sv_spin_corr_raw(u: Sequence[int], v: Sequence[int], i: int, j: int) -> Fraction:
    """<u|S_i.S_j|v> on the same (unnormalized) scale as sv_inner_raw."""
    mi, mj = 1 << i, 1 << j
    mask = mi | mj
    zz = 0
    ex = 0
    for b, vb in enumerate(v):
        if vb == 0:
            continue
        if ((b & mi) != 0) == ((b & mj) != 0):
            zz += u[b] * vb
        else:
            zz -= u[b] * vb
            ex += u[b ^ mask] * vb
    return Fraction(zz, 4) + Fraction(ex, 2)


def sv_pair_correlator(u: Sequence[int], v: Sequence[int], i: int, j: int) -> Fraction:
    """<u|S_i.S_j|v> / <u|v> for two individual VB states."""
    if i == j:
        raise ValueError("spin correlator needs two distinct sites")
    return sv_spin_corr_raw(u, v, i, j) / sv_inner_raw(u, v)


def statevector_oracle(matches: Sequence[Sequence[int]], sublattice: Sequence[int],
                       i: int, j: int) -> Fraction:
    """<Psi|S_i.S_j|Psi>/<Psi|Psi> for the equal-amplitude superposition."""
    if i == j:
        raise ValueError("spin correlator needs two distinct sites")
    psi = superposition_vector(matches, sublattice)
    return sv_spin_corr_raw(psi, psi, i, j) / sv_inner_raw(psi, psi)


def sv_total_spin_sq(vec: Sequence[int], sites: Sequence[int] | None = None) -> Fraction:
    """<S^2> of the (sub)system spanned by `sites` (default: all sites)."""
    n = (len(vec) - 1).bit_length()
    if sites is None:
        sites = range(n)
    sites = list(sites)
    norm = sv_inner_raw(vec, vec)
    total = Fraction(3 * len(sites), 4)
    for a in range(len(sites)):
        for b in range(a + 1, len(sites)):
            total += 2 * sv_spin_corr_raw(vec, vec, sites[a], sites[b]) / norm
    return total


# ---------------------------------------------------------------------------
# decimal printing of exact rationals
# ---------------------------------------------------------------------------

def fraction_decimal_str(value: Fraction, digits: int) -> str:
    """Round a rational to `digits` decimal places (half-to-even) as a string."""
    if digits < 0:
        raise ValueError("digits must be nonnegative")
    sign = "-" if value < 0 else ""
    scaled = abs(value) * 10 ** digits
    q, r = divmod(scaled.numerator, scaled.denominator)
    if 2 * r > scaled.denominator or (2 * r == scaled.denominator and q % 2 == 1):
        q += 1
    whole, frac = divmod(q, 10 ** digits)
    if digits == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{digits}d}"
