import time
from collections import Counter, deque

import numpy as np
import pytest

from rvbent.exact import enumerate_nn_coverings
from rvbent.lattice import build_lattice
from rvbent.mc import (McConfig, _delta_n_plaquette, _rebuild_loops, _winding_numbers,
                       exchange_update, init_state, measure, merge_results,
                       plaquette_update, run_chain, run_chain_raw, transversal_cycles,
                       winding_update, integrated_autocorrelation_time)
from rvbent.vbstate import CoveringKind

EXACT_P_4 = 0.4457579115872


def small_cfg(**kw):
    base = dict(L=4, seed=9, n_sweeps=6400, n_bins=64, n_therm=500)
    base.update(kw)
    return McConfig(**base)


# ---------------------------------------------------------------------------
# configuration validation
# ---------------------------------------------------------------------------

def test_config_defaults():
    cfg = McConfig(L=8, seed=1, n_sweeps=6400)
    assert cfg.n_therm == 10_000
    assert cfg.winding_per_sweep == 32
    assert cfg.swaps_per_sweep == 16
    assert abs(sum(cfg.update_mix) - 1.0) < 1e-12


@pytest.mark.parametrize("kw", [
    dict(L=3), dict(L=2), dict(n_bins=16), dict(n_sweeps=6401),
    dict(bc="open"), dict(update_mix=(0.5, 0.4)), dict(seed=-1),
    dict(update_mix=(1.0, 0.0)), dict(n_therm=-5), dict(swaps_per_sweep=-1),
])
def test_config_validation_errors(kw):
    with pytest.raises(ValueError):
        small_cfg(**kw).validate()


def test_frozen_sector_needs_flag():
    cfg = small_cfg(update_mix=(1.0, 0.0), allow_frozen_sector=True)
    cfg.validate()
    assert cfg.winding_per_sweep == 0


# ---------------------------------------------------------------------------
# initial state
# ---------------------------------------------------------------------------

def test_init_columnar():
    st = init_state(small_cfg())
    assert st.n_loops == 8
    assert st.log2_weight == 0
    assert measure(st) == pytest.approx(-3.0 / 16.0)
    assert st.winding() == ((0, 0), (0, 0))
    for which in (0, 1):
        cov = st.replica(which)
        assert cov.kind is CoveringKind.NEAREST_NEIGHBOUR
        cov.validate(st.lattice.sublattices, st.lattice)
    loops = st.loops()
    assert loops.n_loops == 8
    assert set(loops.loop_lengths) == {2}


def test_init_deterministic():
    a, b = init_state(small_cfg()), init_state(small_cfg())
    assert np.array_equal(a.match, b.match)
    assert a.rng.random() == b.rng.random()


def test_init_l128_fast():
    t0 = time.time()
    st = init_state(McConfig(L=128, seed=1, n_sweeps=6400))
    assert time.time() - t0 < 1.0
    assert st.n_loops == 128 * 128 // 2


# ---------------------------------------------------------------------------
# plaquette updates
# ---------------------------------------------------------------------------

def _all_matches(lat):
    return [np.array(c.match, np.int32) for c in enumerate_nn_coverings(lat).coverings]


def test_delta_n_exhaustive_4x4():
    # every covering pair, every flippable plaquette, both replicas: the
    # incremental walk must equal a full recomputation, and lie in {-1, 0, +1}
    lat = build_lattice(4, "periodic")
    ms = _all_matches(lat)
    lid = np.empty(16, np.int32)
    lid2 = np.empty(16, np.int32)
    checked = 0
    for ma in ms:
        for mb in ms:
            n0 = _rebuild_loops(ma, mb, lid)
            for s00, s10, s11, s01 in lat.plaquettes:
                for mr, mo in ((ma, mb), (mb, ma)):
                    if mr[s00] == s10 and mr[s01] == s11:
                        p1, p3, vert = s10, s01, True
                    elif mr[s00] == s01 and mr[s10] == s11:
                        p1, p3, vert = s01, s10, False
                    else:
                        continue
                    dn = _delta_n_plaquette(mr, mo, lid, s00, p1, s11, p3)
                    mc = mr.copy()
                    if vert:
                        mc[s00], mc[s01], mc[s10], mc[s11] = s01, s00, s11, s10
                    else:
                        mc[s00], mc[s10], mc[s01], mc[s11] = s10, s00, s11, s01
                    assert dn in (-1, 0, 1)
                    assert dn == _rebuild_loops(mc, mo, lid2) - n0
                    checked += 1
    assert checked == 557_056


def test_plaquette_update_statistics():
    st = init_state(small_cfg())
    rng = np.random.default_rng(0)
    for _ in range(2000):
        before = st.n_loops
        accepted = plaquette_update(st, rng)
        assert abs(st.n_loops - before) <= 1
        if not accepted:
            assert st.n_loops == before
    for which in (0, 1):
        st.replica(which).validate(st.lattice.sublattices, st.lattice)


def test_plaquette_preserves_winding():
    st = init_state(small_cfg(seed=31))
    rng = np.random.default_rng(2)
    for _ in range(3000):
        before = st.winding()
        if plaquette_update(st, rng):
            assert st.winding() == before


def test_winding_update_changes_sector():
    # columnar start: every row is eligible horizontally; a single accepted
    # rotation moves one winding number by one
    st = init_state(small_cfg(seed=17))
    rng = np.random.default_rng(4)
    changed = []
    for _ in range(200):
        before = st.winding()
        if winding_update(st, rng):
            after = st.winding()
            delta = [abs(a - b) for w0, w1 in zip(before, after) for a, b in zip(w0, w1)]
            if after != before:
                changed.append(sum(delta))
    assert changed and all(d in (1, 2) for d in changed)


def test_exchange_preserves_loops_and_weight():
    st = init_state(small_cfg(seed=23))
    rng = np.random.default_rng(5)
    for _ in range(500):
        plaquette_update(st, rng)
    loops_before = st.loops()
    wa, wb = st.winding()
    total = (wa[0] + wb[0], wa[1] + wb[1])
    for _ in range(200):
        assert exchange_update(st, rng)
        lp = st.loops()
        assert lp == loops_before  # transition graph is exactly invariant
        wa2, wb2 = st.winding()
        assert (wa2[0] + wb2[0], wa2[1] + wb2[1]) == total
        for which in (0, 1):
            st.replica(which).validate(st.lattice.sublattices, st.lattice)


def test_incremental_vs_full_recompute_larger_l():
    # paranoid chains recompute after every accepted move at L in {4, 8, 16}
    for L, sweeps in ((4, 1600), (8, 640), (16, 320)):
        cfg = McConfig(L=L, seed=100 + L, n_sweeps=sweeps, n_bins=32,
                       n_therm=0, paranoid=True)
        run_chain(cfg)  # raises on any mismatch


# ---------------------------------------------------------------------------
# measurements and chains
# ---------------------------------------------------------------------------

def test_measure_range_along_chain():
    st = init_state(small_cfg(seed=41))
    rng = np.random.default_rng(6)
    for _ in range(2000):
        plaquette_update(st, rng)
        v = measure(st)
        assert -0.75 <= v <= 0.0


def test_run_chain_result_shape():
    res = run_chain(small_cfg())
    assert len(res.bin_series) == 64
    assert res.p_mean == pytest.approx(-4.0 * res.corr_mean / 3.0)
    assert res.p_err == pytest.approx(4.0 * res.corr_err / 3.0)
    assert res.corr_err > 0
    assert 0 < res.acceptance_rates["plaquette"] < 1
    assert res.acceptance_rates["exchange"] == 1.0
    assert res.metadata["rng_algorithm"].startswith("numpy PCG64")
    assert res.metadata["code_version"]
    assert sum(res.sector_histogram.values()) == 2 * 6400


def test_run_chain_deterministic():
    a = run_chain(small_cfg())
    b = run_chain(small_cfg())
    assert a.to_dict() == b.to_dict()


def test_run_chain_seed_sensitivity():
    a = run_chain(small_cfg())
    b = run_chain(small_cfg(seed=10))
    assert a.bin_series != b.bin_series


def test_l4_agrees_with_exact_moderate_run():
    res = run_chain(McConfig(L=4, seed=5150, n_sweeps=102_400, n_bins=64))
    assert abs(res.p_mean - EXACT_P_4) <= 4 * res.p_err


def test_error_scaling_l16():
    r1 = run_chain(McConfig(L=16, seed=42, n_sweeps=12_800, n_bins=64))
    r2 = run_chain(McConfig(L=16, seed=43, n_sweeps=25_600, n_bins=64))
    ratio = r2.corr_err / r1.corr_err
    inv_sqrt2 = 2.0 ** -0.5
    assert 0.8 * inv_sqrt2 <= ratio <= 1.2 * inv_sqrt2


def test_tau_int_on_ar1_series():
    # AR(1) with coefficient a has tau_int = (1+a)/(1-a)
    rng = np.random.default_rng(12)
    a = 0.8
    x = np.empty(200_000)
    x[0] = 0.0
    noise = rng.standard_normal(x.size)
    for i in range(1, x.size):
        x[i] = a * x[i - 1] + noise[i]
    tau = integrated_autocorrelation_time(x)
    assert tau == pytest.approx((1 + a) / (1 - a), rel=0.15)
    assert integrated_autocorrelation_time(np.ones(100)) == 0.0


def test_merge_results_fold():
    rs = [run_chain(small_cfg(seed=s)) for s in (1, 2, 3)]
    merged = merge_results(rs)
    assert len(merged.bin_series) == 3 * 64
    assert merged.metadata["merged_from"] == 3
    assert merged.p_mean == pytest.approx(-4.0 * merged.corr_mean / 3.0)
    # commutative up to float assembly order of identical bin sets
    again = merge_results([rs[2], rs[0], rs[1]])
    assert sorted(again.bin_series) == sorted(merged.bin_series)
    counters = merged.metadata["counters"]
    assert counters["plaquette_proposed"] == 3 * 6400 * 16
    with pytest.raises(ValueError):
        merge_results([rs[0], rs[0]])
    with pytest.raises(ValueError):
        merge_results([])


# ---------------------------------------------------------------------------
# ergodicity bookkeeping
# ---------------------------------------------------------------------------

def _single_covering_moves(lat, cycles):
    plaqs = lat.plaquettes

    def neighbors(m):
        out = []
        for s00, s10, s11, s01 in plaqs:
            if m[s00] == s10 and m[s01] == s11:
                mm = list(m)
                mm[s00], mm[s01], mm[s10], mm[s11] = s01, s00, s11, s10
            elif m[s00] == s01 and m[s10] == s11:
                mm = list(m)
                mm[s00], mm[s10], mm[s01], mm[s11] = s10, s00, s11, s01
            else:
                continue
            out.append(tuple(mm))
        for cyc in cycles:
            k = len(cyc)
            if all(m[cyc[i]] in (cyc[(i + 1) % k], cyc[(i - 1) % k]) for i in range(k)):
                mm = list(m)
                for i in range(k):
                    mm[cyc[i]] = cyc[(i + 1) % k] + cyc[(i - 1) % k] - mm[cyc[i]]
                out.append(tuple(mm))
        return out

    return neighbors


def test_single_replica_moves_connect_all_4x4_coverings():
    # plaquette flips + transversal-cycle rotations reach all 272 coverings,
    # so the product chain on covering pairs is connected as well
    lat = build_lattice(4, "periodic")
    covs = [c.match for c in enumerate_nn_coverings(lat).coverings]
    arr, lens = transversal_cycles(4)
    cycles = [[int(v) for v in arr[i, :lens[i]]] for i in range(arr.shape[0])]
    neighbors = _single_covering_moves(lat, cycles)
    seen = {covs[0]}
    queue = deque([covs[0]])
    while queue:
        m = queue.popleft()
        for nb in neighbors(m):
            if nb not in seen:
                seen.add(nb)
                queue.append(nb)
    assert len(seen) == 272


def test_all_4x4_sectors_visited():
    lat = build_lattice(4, "periodic")
    existing = set()
    for cov in enumerate_nn_coverings(lat).coverings:
        w = _winding_numbers(np.array(cov.match, np.int32), 4)
        existing.add((int(w[0]), int(w[1])))
    assert len(existing) == 13

    _, _, _, windings = run_chain_raw(McConfig(L=4, seed=606, n_sweeps=204_800, n_bins=64))
    visited = set()
    for row in windings:
        visited.add((int(row[0]), int(row[1])))
        visited.add((int(row[2]), int(row[3])))
    assert visited == existing


def test_l6_chain_reaches_diagonal_sectors():
    # the fully tilted sectors need the exchange move; regression for it
    _, _, _, windings = run_chain_raw(McConfig(L=6, seed=3, n_sweeps=204_800, n_bins=64))
    visited = set()
    for row in windings:
        visited.add((int(row[0]), int(row[1])))
        visited.add((int(row[2]), int(row[3])))
    for sec in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        assert sec in visited


def test_empirical_nloops_distribution_matches_exact():
    # detailed balance: thinned chain histogram over loop-count classes vs the
    # exactly enumerated weights
    scipy_stats = pytest.importorskip("scipy.stats")
    lat = build_lattice(4, "periodic")
    ms = [c.match for c in enumerate_nn_coverings(lat).coverings]
    Z = 0
    weights = Counter()
    from rvbent.vbstate import decompose_matches
    for ma in ms:
        for mb in ms:
            _, lens = decompose_matches(ma, mb)
            weights[len(lens)] += 1 << len(lens)
    Z = sum(weights.values())

    _, _, nloops, _ = run_chain_raw(McConfig(L=4, seed=20260810, n_sweeps=409_600, n_bins=64))
    thin = nloops[::10]
    emp = Counter(thin.tolist())
    ks = sorted(weights)
    obs = np.array([emp.get(k, 0) for k in ks], float)
    exp = np.array([weights[k] / Z * len(thin) for k in ks])
    while exp[0] < 10:
        exp[1] += exp[0]
        obs[1] += obs[0]
        exp, obs = exp[1:], obs[1:]
    chi2, pval = scipy_stats.chisquare(obs, exp)
    assert pval > 0.01
