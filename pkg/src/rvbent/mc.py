"""Markov-chain Monte Carlo over pairs of NN dimer coverings.

Samples covering pairs (a, b) with weight 2^N_loops of their transition graph
using Metropolis plaquette rotations plus rotations along transversal cycles
(rows, columns, and the two staircase diagonals) that move the torus winding
numbers. Straight lines alone are not enough: the fully tilted coverings in
the diagonal winding sectors admit neither a flippable plaquette nor an
aligned row, and on the 4x4 torus exactly 8 of the 272 coverings are
unreachable without the staircase moves (breadth-first search over the full
covering set; with them, all 272 are connected).

The loop count is updated incrementally: a plaquette flip merges two loops,
splits one, or rewires one in place, decided by a bounded two-frontier walk
from the four affected sites. Hot paths are numba-compiled; a single chain is
strictly sequential, independent chains share nothing and their results fold
associatively.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from ._version import __version__
from .lattice import BoundaryCondition, Lattice, build_lattice
from .vbstate import CoveringKind, DimerCovering, LoopDecomposition, decompose_matches

RNG_ALGORITHM = "numpy PCG64 (integer seed via SeedSequence)"


# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------

@njit(cache=True)
def _rebuild_loops(match_a, match_b, loop_id):
    """Full loop decomposition; labels each loop by its smallest site."""
    n = match_a.shape[0]
    for s in range(n):
        loop_id[s] = -1
    nl = 0
    for s in range(n):
        if loop_id[s] >= 0:
            continue
        nl += 1
        cur = s
        while loop_id[cur] < 0:
            loop_id[cur] = s
            nxt = match_a[cur]
            loop_id[nxt] = s
            cur = match_b[nxt]
    return nl


@njit(cache=True)
def _delta_n_plaquette(match_r, match_o, loop_id, p0, p1, p2, p3):
    """Loop-count change if r-dimers (p0,p1),(p2,p3) become (p1,p2),(p3,p0).

    Distinct loops merge (-1). Within one loop, walk simultaneously from p1
    (away from p0) and backward from p0: meeting the far dimer end p2 forward
    or p3 backward means the rewiring splits the loop (+1), the opposite
    orientation keeps a single loop (0). Early exit at the nearer end keeps
    the walk bounded by the loop length.
    """
    if loop_id[p0] != loop_id[p2]:
        return -1
    c1 = p1
    c2 = p0
    via_o1 = True
    via_o2 = True
    while True:
        c1 = match_o[c1] if via_o1 else match_r[c1]
        via_o1 = not via_o1
        if c1 == p2:
            return 1
        if c1 == p3:
            return 0
        c2 = match_o[c2] if via_o2 else match_r[c2]
        via_o2 = not via_o2
        if c2 == p3:
            return 1
        if c2 == p2:
            return 0


@njit(cache=True)
def _relabel_cycle(match_a, match_b, loop_id, start, label):
    cur = start
    while True:
        loop_id[cur] = label
        nxt = match_a[cur]
        loop_id[nxt] = label
        cur = match_b[nxt]
        if cur == start:
            break


@njit(cache=True)
def _plaquette_proposal(match, loop_id, n_loops, plaq, rng):
    """One Metropolis plaquette proposal. Returns (accepted, n_loops)."""
    r = rng.integers(0, 2)
    q = rng.integers(0, plaq.shape[0])
    s00 = plaq[q, 0]
    s10 = plaq[q, 1]
    s11 = plaq[q, 2]
    s01 = plaq[q, 3]
    mr = match[r]
    mo = match[1 - r]
    if mr[s00] == s10 and mr[s01] == s11:
        to_vertical = True
        p1 = s10
        p3 = s01
    elif mr[s00] == s01 and mr[s10] == s11:
        to_vertical = False
        p1 = s01
        p3 = s10
    else:
        return False, n_loops
    dn = _delta_n_plaquette(mr, mo, loop_id, s00, p1, s11, p3)
    if dn < 0 and rng.random() >= 0.5:
        return False, n_loops
    if to_vertical:
        mr[s00] = s01
        mr[s01] = s00
        mr[s10] = s11
        mr[s11] = s10
    else:
        mr[s00] = s10
        mr[s10] = s00
        mr[s01] = s11
        mr[s11] = s01
    if dn == -1:
        _relabel_cycle(mr, mo, loop_id, s00, s00)
    elif dn == 1:
        _relabel_cycle(mr, mo, loop_id, s00, s00)
        second = s10 if to_vertical else s01
        _relabel_cycle(mr, mo, loop_id, second, second)
    return True, n_loops + dn


@njit(cache=True)
def _rotate_cycle(m, cyc, length):
    """Re-pair every site of a fully aligned cycle to its other neighbour."""
    for k in range(length):
        nxt = cyc[(k + 1) % length]
        prv = cyc[(k - 1) % length]
        m[cyc[k]] = nxt + prv - m[cyc[k]]


@njit(cache=True)
def _winding_proposal(match, loop_id, scratch, cycles, cycle_lengths, n_loops, rng):
    """One transversal-cycle rotation; moves one replica across winding sectors.

    Eligible only when every site of the chosen cycle is matched to a cycle
    neighbour; the rotation is an involution, so proposals are symmetric. The
    loop-count change is taken from a full recomputation (eligible cycles are
    rare, the O(N) rebuild is not a bottleneck).
    """
    r = rng.integers(0, 2)
    ci = rng.integers(0, cycles.shape[0])
    cyc = cycles[ci]
    length = cycle_lengths[ci]
    m = match[r]
    for k in range(length):
        p = m[cyc[k]]
        if p != cyc[(k + 1) % length] and p != cyc[(k - 1) % length]:
            return False, n_loops
    _rotate_cycle(m, cyc, length)
    new_nl = _rebuild_loops(match[0], match[1], scratch)
    dn = new_nl - n_loops
    if dn < 0 and rng.random() >= 2.0 ** dn:
        _rotate_cycle(m, cyc, length)
        return False, n_loops
    loop_id[:] = scratch
    return True, new_nl


@njit(cache=True)
def _swap_proposal(match, loop_id, scratch, rng):
    """Exchange replica ownership of the dimers along one transition-graph loop.

    Picks a site uniformly and swaps its whole loop. The loop set, the weight,
    and the estimator are invariant (only which replica owns which edge
    changes), the move is an involution proposed with a length-proportional
    probability that is identical in both directions, so it is always
    accepted. It shuttles winding between the replicas, opening sector paths
    that rigid row/column/staircase rotations cannot propose on their own.
    """
    s = rng.integers(0, match.shape[1])
    cnt = 0
    cur = s
    while True:
        scratch[cnt] = cur
        cnt += 1
        nxt = match[0, cur]
        scratch[cnt] = nxt
        cnt += 1
        cur = match[1, nxt]
        if cur == s:
            break
    for k in range(cnt):
        u = scratch[k]
        tmp = match[0, u]
        match[0, u] = match[1, u]
        match[1, u] = tmp
    return True


@njit(cache=True)
def _winding_numbers(m, L):
    """Signed dimer crossings of the two seams (sign from the A-endpoint side)."""
    wx = 0
    wy = 0
    for y in range(L):
        if m[y * L + L - 1] == y * L:
            wx += 1 if (L - 1 + y) % 2 == 0 else -1
    for x in range(L):
        if m[(L - 1) * L + x] == x:
            wy += 1 if (x + L - 1) % 2 == 0 else -1
    return wx, wy


@njit(cache=True)
def _bond_average(loop_id, bonds):
    """NN estimator averaged over all bonds: -3/4 per same-loop bond."""
    k = 0
    for b in range(bonds.shape[0]):
        if loop_id[bonds[b, 0]] == loop_id[bonds[b, 1]]:
            k += 1
    return -0.75 * k / bonds.shape[0]


@njit(cache=True)
def _partitions_equal(a, b):
    n = a.shape[0]
    fwd = -np.ones(n, dtype=np.int64)
    bwd = -np.ones(n, dtype=np.int64)
    for s in range(n):
        x = a[s]
        y = b[s]
        if fwd[x] == -1:
            fwd[x] = y
        elif fwd[x] != y:
            return False
        if bwd[y] == -1:
            bwd[y] = x
        elif bwd[y] != x:
            return False
    return True


@njit(cache=True)
def _run_sweeps(match, loop_id, n_loops, plaq, bonds, cycles, cycle_lengths, L, rng,
                n_sweeps, n_wind, n_swap, record, samples, nloops_series, windings,
                counters, paranoid, scratch):
    """Drive sweeps of L^2 plaquette + n_wind winding + n_swap exchange proposals.

    With record, stores one bond-averaged measurement, the loop count, and
    both replicas' winding numbers per sweep. With paranoid, every accepted
    move is validated against a full loop recomputation (returns status -1 on
    any mismatch). Returns (status, n_loops).
    """
    n = L * L
    for sw in range(n_sweeps):
        for _ in range(n):
            counters[0] += 1
            acc, n_loops = _plaquette_proposal(match, loop_id, n_loops, plaq, rng)
            if acc:
                counters[1] += 1
                if paranoid:
                    if _rebuild_loops(match[0], match[1], scratch) != n_loops:
                        return -1, n_loops
                    if not _partitions_equal(loop_id, scratch):
                        return -1, n_loops
        for _ in range(n_wind):
            counters[2] += 1
            acc, n_loops = _winding_proposal(match, loop_id, scratch, cycles,
                                             cycle_lengths, n_loops, rng)
            if acc:
                counters[3] += 1
        for _ in range(n_swap):
            counters[4] += 1
            if _swap_proposal(match, loop_id, scratch, rng):
                counters[5] += 1
                if paranoid:
                    if _rebuild_loops(match[0], match[1], scratch) != n_loops:
                        return -1, n_loops
                    if not _partitions_equal(loop_id, scratch):
                        return -1, n_loops
        if record:
            samples[sw] = _bond_average(loop_id, bonds)
            nloops_series[sw] = n_loops
            wxa, wya = _winding_numbers(match[0], L)
            wxb, wyb = _winding_numbers(match[1], L)
            windings[sw, 0] = wxa
            windings[sw, 1] = wya
            windings[sw, 2] = wxb
            windings[sw, 3] = wyb
    return 0, n_loops


# ---------------------------------------------------------------------------
# configuration and state
# ---------------------------------------------------------------------------

@dataclass
class McConfig:
    """Chain parameters. A sweep is L^2 plaquette proposals plus the winding
    proposals implied by update_mix (fractions of all proposals per sweep)."""

    L: int
    seed: int
    n_sweeps: int
    bc: BoundaryCondition | str = BoundaryCondition.PERIODIC
    n_therm: int | None = None
    n_bins: int = 64
    update_mix: tuple[float, float] | None = None
    swaps_per_sweep: int | None = None
    allow_frozen_sector: bool = False
    paranoid: bool = False

    def __post_init__(self):
        if isinstance(self.bc, str):
            self.bc = BoundaryCondition.parse(self.bc)
        if self.n_therm is None:
            self.n_therm = max(10_000, 100 * self.L)
        if self.update_mix is None:
            # default: one winding proposal per transversal cycle per sweep
            total = self.L * self.L + 4 * self.L
            self.update_mix = (self.L * self.L / total, 4 * self.L / total)
        if self.swaps_per_sweep is None:
            self.swaps_per_sweep = 2 * self.L

    def validate(self) -> None:
        if self.bc is not BoundaryCondition.PERIODIC:
            raise ValueError("Monte Carlo production runs require periodic boundaries")
        if self.L < 4 or self.L % 2 != 0:
            raise ValueError(f"L must be even and >= 4, got {self.L}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")
        if self.n_bins < 32:
            raise ValueError(f"need n_bins >= 32, got {self.n_bins}")
        if self.n_sweeps < self.n_bins or self.n_sweeps % self.n_bins != 0:
            raise ValueError(f"n_sweeps={self.n_sweeps} must be a multiple of n_bins={self.n_bins}")
        if self.n_therm < 0:
            raise ValueError("n_therm must be nonnegative")
        f_plaq, f_wind = self.update_mix
        if f_plaq <= 0 or f_wind < 0 or abs(f_plaq + f_wind - 1.0) > 1e-9:
            raise ValueError(f"update_mix fractions must be nonnegative and sum to 1, "
                             f"got {self.update_mix}")
        if f_wind == 0 and not self.allow_frozen_sector:
            raise ValueError("winding fraction 0 freezes the topological sector; "
                             "set allow_frozen_sector=True to acknowledge")
        if self.swaps_per_sweep < 0:
            raise ValueError("swaps_per_sweep must be nonnegative")

    @property
    def winding_per_sweep(self) -> int:
        f_plaq, f_wind = self.update_mix
        return round(self.L * self.L * f_wind / f_plaq)

    def to_dict(self) -> dict:
        return {
            "L": self.L,
            "bc": self.bc.value,
            "seed": self.seed,
            "n_therm": self.n_therm,
            "n_sweeps": self.n_sweeps,
            "n_bins": self.n_bins,
            "update_mix": list(self.update_mix),
            "winding_per_sweep": self.winding_per_sweep,
            "swaps_per_sweep": self.swaps_per_sweep,
            "allow_frozen_sector": self.allow_frozen_sector,
        }


def transversal_cycles(L: int) -> tuple[np.ndarray, np.ndarray]:
    """Site cycles whose rotation changes a winding number: rows, columns,
    and the two staircase diagonals (length 2L, winding both directions).

    Returns (cycles, lengths): a (4L, 2L) int32 array padded with -1 and the
    used length of each row.
    """
    cycles = np.full((4 * L, 2 * L), -1, dtype=np.int32)
    lengths = np.empty(4 * L, dtype=np.int32)
    for y in range(L):
        cycles[y, :L] = [y * L + x for x in range(L)]
        lengths[y] = L
    for x in range(L):
        cycles[L + x, :L] = [y * L + x for y in range(L)]
        lengths[L + x] = L
    for c in range(L):
        up = []
        down = []
        for k in range(L):
            up += [k * L + (c + k) % L, k * L + (c + k + 1) % L]
            yd = (-k) % L
            down += [yd * L + (c + k) % L, yd * L + (c + k + 1) % L]
        cycles[2 * L + c, :] = up
        lengths[2 * L + c] = 2 * L
        cycles[3 * L + c, :] = down
        lengths[3 * L + c] = 2 * L
    return cycles, lengths


@dataclass
class McState:
    """Live chain state: two NN coverings, their loops, and the RNG."""

    lattice: Lattice
    match: np.ndarray       # (2, n) int32, involution per replica
    loop_id: np.ndarray     # (n,) int32, label = smallest site after rebuilds
    n_loops: int
    rng: np.random.Generator
    plaq: np.ndarray        # (n_plaq, 4) int32
    bonds: np.ndarray       # (n_bonds, 2) int32
    cycles: np.ndarray      # (4L, 2L) int32, padded transversal cycles
    cycle_lengths: np.ndarray

    def replica(self, which: int) -> DimerCovering:
        return DimerCovering(match=tuple(int(v) for v in self.match[which]),
                             kind=CoveringKind.NEAREST_NEIGHBOUR)

    @property
    def replica_a(self) -> DimerCovering:
        return self.replica(0)

    @property
    def replica_b(self) -> DimerCovering:
        return self.replica(1)

    def loops(self) -> LoopDecomposition:
        loop_id, lengths = decompose_matches(self.match[0].tolist(), self.match[1].tolist())
        return LoopDecomposition(n_loops=len(lengths), loop_id=tuple(loop_id),
                                 loop_lengths=tuple(lengths))

    def winding(self) -> tuple[tuple[int, int], tuple[int, int]]:
        L = self.lattice.L
        wa = _winding_numbers(self.match[0], L)
        wb = _winding_numbers(self.match[1], L)
        return (int(wa[0]), int(wa[1])), (int(wb[0]), int(wb[1]))

    @property
    def log2_weight(self) -> int:
        return self.n_loops - self.lattice.n_sites // 2


@dataclass
class McResult:
    corr_mean: float
    corr_err: float
    p_mean: float
    p_err: float
    bin_series: tuple[float, ...]
    acceptance_rates: dict
    sector_histogram: dict
    metadata: dict

    def to_dict(self) -> dict:
        return {
            "corr_mean": self.corr_mean,
            "corr_err": self.corr_err,
            "p_mean": self.p_mean,
            "p_err": self.p_err,
            "bin_series": list(self.bin_series),
            "acceptance_rates": self.acceptance_rates,
            "sector_histogram": {f"{k[0]},{k[1]}": v for k, v in
                                 sorted(self.sector_histogram.items())},
            "metadata": self.metadata,
        }

    def bins_csv(self) -> str:
        lines = ["bin_index,corr_mean"]
        lines += [f"{i},{v!r}" for i, v in enumerate(self.bin_series)]
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def init_state(cfg: McConfig) -> McState:
    """Columnar start: every row paired horizontally x = 0-1, 2-3, ...

    Both replicas identical, so the transition graph is L^2/2 two-site loops
    and the pair weight is exactly 1.
    """
    cfg.validate()
    lat = build_lattice(cfg.L, cfg.bc)
    n = lat.n_sites
    match = np.empty((2, n), dtype=np.int32)
    for y in range(cfg.L):
        for x in range(0, cfg.L, 2):
            s = y * cfg.L + x
            match[:, s] = s + 1
            match[:, s + 1] = s
    loop_id = np.empty(n, dtype=np.int32)
    n_loops = int(_rebuild_loops(match[0], match[1], loop_id))
    plaq = np.array(lat.plaquettes, dtype=np.int32)
    bonds = np.array(lat.bonds, dtype=np.int32)
    cycles, cycle_lengths = transversal_cycles(cfg.L)
    rng = np.random.default_rng(cfg.seed)
    return McState(lattice=lat, match=match, loop_id=loop_id, n_loops=n_loops,
                   rng=rng, plaq=plaq, bonds=bonds, cycles=cycles,
                   cycle_lengths=cycle_lengths)


def plaquette_update(state: McState, rng: np.random.Generator | None = None) -> bool:
    """Single plaquette proposal with Metropolis acceptance min(1, 2^dN)."""
    acc, nl = _plaquette_proposal(state.match, state.loop_id, state.n_loops,
                                  state.plaq, rng if rng is not None else state.rng)
    state.n_loops = int(nl)
    return bool(acc)


def winding_update(state: McState, rng: np.random.Generator | None = None) -> bool:
    """Single transversal-cycle rotation across winding sectors."""
    scratch = np.empty_like(state.loop_id)
    acc, nl = _winding_proposal(state.match, state.loop_id, scratch, state.cycles,
                                state.cycle_lengths, state.n_loops,
                                rng if rng is not None else state.rng)
    state.n_loops = int(nl)
    return bool(acc)


def exchange_update(state: McState, rng: np.random.Generator | None = None) -> bool:
    """Swap replica ownership along one transition-graph loop (always accepted)."""
    scratch = np.empty_like(state.loop_id)
    return bool(_swap_proposal(state.match, state.loop_id, scratch,
                               rng if rng is not None else state.rng))


def measure(state: McState) -> float:
    """Loop estimator of <S_i.S_j> averaged over every NN bond."""
    return float(_bond_average(state.loop_id, state.bonds))


def integrated_autocorrelation_time(series: Sequence[float], c: float = 6.0) -> float:
    """Sokal-windowed integrated autocorrelation time of a sample series."""
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 2:
        return 0.0
    x = x - x.mean()
    if not np.any(x):
        return 0.0
    m = 1
    while m < 2 * n:
        m <<= 1
    f = np.fft.rfft(x, m)
    acf = np.fft.irfft(f * f.conj(), m)[:n]
    rho = acf / acf[0]
    taus = 2.0 * np.cumsum(rho) - 1.0
    for w in range(1, n):
        if w >= c * taus[w]:
            return float(taus[w])
    return float(taus[-1])


def run_chain(cfg: McConfig) -> McResult:
    """Thermalize, then measure once per sweep; errors from n_bins bin means."""
    result, _, _, _ = run_chain_raw(cfg)
    return result


def run_chain_raw(cfg: McConfig) -> tuple[McResult, np.ndarray, np.ndarray, np.ndarray]:
    """run_chain plus the raw per-sweep series (samples, loop counts, windings)."""
    state = init_state(cfg)
    n = state.lattice.n_sites
    n_wind = cfg.winding_per_sweep
    scratch = np.empty(n, dtype=np.int32)
    paranoid = bool(cfg.paranoid)

    n_swap = cfg.swaps_per_sweep
    dummy_f = np.empty(1, dtype=np.float64)
    dummy_n = np.empty(1, dtype=np.int32)
    dummy_w = np.empty((1, 4), dtype=np.int32)
    therm_counters = np.zeros(6, dtype=np.int64)
    status, n_loops = _run_sweeps(state.match, state.loop_id, state.n_loops, state.plaq,
                                  state.bonds, state.cycles, state.cycle_lengths, cfg.L,
                                  state.rng, cfg.n_therm, n_wind, n_swap, False, dummy_f,
                                  dummy_n, dummy_w, therm_counters, paranoid, scratch)
    if status != 0:
        raise RuntimeError("incremental loop update diverged from full recomputation")

    samples = np.empty(cfg.n_sweeps, dtype=np.float64)
    nloops_series = np.empty(cfg.n_sweeps, dtype=np.int32)
    windings = np.empty((cfg.n_sweeps, 4), dtype=np.int32)
    counters = np.zeros(6, dtype=np.int64)
    status, n_loops = _run_sweeps(state.match, state.loop_id, n_loops, state.plaq,
                                  state.bonds, state.cycles, state.cycle_lengths, cfg.L,
                                  state.rng, cfg.n_sweeps, n_wind, n_swap, True, samples,
                                  nloops_series, windings, counters, paranoid, scratch)
    if status != 0:
        raise RuntimeError("incremental loop update diverged from full recomputation")
    state.n_loops = int(n_loops)
    if not np.all(np.isfinite(samples)):
        raise RuntimeError("non-finite measurement encountered")

    bins = samples.reshape(cfg.n_bins, -1).mean(axis=1)
    corr_mean = float(bins.mean())
    corr_err = float(bins.std(ddof=0) / math.sqrt(cfg.n_bins - 1))

    hist: Counter = Counter()
    for row in windings:
        hist[(int(row[0]), int(row[1]))] += 1
        hist[(int(row[2]), int(row[3]))] += 1

    plaq_prop, plaq_acc, wind_prop, wind_acc, swap_prop, swap_acc = (int(v) for v in counters)
    rates = {
        "plaquette": plaq_acc / plaq_prop if plaq_prop else 0.0,
        "winding": wind_acc / wind_prop if wind_prop else 0.0,
        "exchange": swap_acc / swap_prop if swap_prop else 0.0,
    }
    metadata = {
        "config": cfg.to_dict(),
        "rng_algorithm": RNG_ALGORITHM,
        "code_version": __version__,
        "tau_int_sweeps": integrated_autocorrelation_time(samples),
        "counters": {"plaquette_proposed": plaq_prop, "plaquette_accepted": plaq_acc,
                     "winding_proposed": wind_prop, "winding_accepted": wind_acc,
                     "exchange_proposed": swap_prop, "exchange_accepted": swap_acc},
        "n_loops_final": int(n_loops),
        "nloops_mean": float(nloops_series.mean()),
    }
    result = McResult(corr_mean=corr_mean, corr_err=corr_err,
                      p_mean=-4.0 * corr_mean / 3.0, p_err=4.0 * corr_err / 3.0,
                      bin_series=tuple(float(b) for b in bins),
                      acceptance_rates=rates, sector_histogram=dict(hist),
                      metadata=metadata)
    return result, samples, nloops_series, windings


def merge_results(results: Sequence[McResult]) -> McResult:
    """Fold independent same-shape chains (different seeds) into one estimate.

    Associative and commutative up to float rounding: bin series concatenate,
    counters and histograms add, the quoted tau_int is the most conservative.
    """
    if not results:
        raise ValueError("nothing to merge")
    if len(results) == 1:
        return results[0]
    base = results[0].metadata["config"]
    for r in results[1:]:
        c = r.metadata["config"]
        if (c["L"], c["bc"], c["n_sweeps"], c["n_bins"]) != \
           (base["L"], base["bc"], base["n_sweeps"], base["n_bins"]):
            raise ValueError("chains must share L, bc, n_sweeps, and n_bins to merge")
    seeds = sorted({r.metadata["config"]["seed"] for r in results})
    if len(seeds) != len(results):
        raise ValueError("merging chains with duplicate seeds double-counts data")

    bins = np.concatenate([np.asarray(r.bin_series) for r in results])
    corr_mean = float(bins.mean())
    corr_err = float(bins.std(ddof=0) / math.sqrt(bins.size - 1))
    hist: Counter = Counter()
    counters: Counter = Counter()
    for r in results:
        hist.update(r.sector_histogram)
        counters.update(r.metadata["counters"])
    rates = {
        "plaquette": counters["plaquette_accepted"] / counters["plaquette_proposed"],
        "winding": (counters["winding_accepted"] / counters["winding_proposed"]
                    if counters["winding_proposed"] else 0.0),
        "exchange": (counters["exchange_accepted"] / counters["exchange_proposed"]
                     if counters["exchange_proposed"] else 0.0),
    }
    metadata = {
        "config": {**base, "seed": seeds},
        "rng_algorithm": results[0].metadata["rng_algorithm"],
        "code_version": results[0].metadata["code_version"],
        "tau_int_sweeps": max(r.metadata["tau_int_sweeps"] for r in results),
        "counters": dict(counters),
        "merged_from": len(results),
    }
    return McResult(corr_mean=corr_mean, corr_err=corr_err,
                    p_mean=-4.0 * corr_mean / 3.0, p_err=4.0 * corr_err / 3.0,
                    bin_series=tuple(float(b) for b in bins),
                    acceptance_rates=rates, sector_histogram=dict(hist),
                    metadata=metadata)
