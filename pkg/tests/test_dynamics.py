import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import scalar_step
from tsfmap.dynamics import (
    DynamicsConfig,
    SigmaMap,
    Simulator,
    centroids,
    normalize,
    partition_sets,
    run,
    step,
)
from tsfmap.encoding import SequenceConfig, encode_sequence


def test_partition_threshold():
    ps, ns = partition_sets(np.array([0.5, 0.05, 1.0]), 0.1)
    assert ps.tolist() == [0, 2]
    assert ns.tolist() == [1]


def test_partition_boundary_goes_to_ns():
    ps, ns = partition_sets(np.array([0.1, 0.2, 0.3]), 0.1)
    assert 0 in ns and 0 not in ps


def test_centroids():
    sigma = SigmaMap(w=np.array([[0.0, 0.0], [2.0, 2.0], [5.0, 1.0], [7.0, 3.0]]),
                     v=np.zeros((4, 2)))
    sets = centroids(sigma, [0, 1], [2, 3])
    assert sets.cp.tolist() == [1.0, 1.0]
    assert sets.cn.tolist() == [6.0, 2.0]


def test_centroid_of_zero_map():
    sigma = SigmaMap(w=np.zeros((4, 3)), v=np.zeros((4, 3)))
    assert centroids(sigma, [0, 1], [2, 3]).cn.tolist() == [0.0, 0.0, 0.0]


def test_singleton_set_is_skip_signal():
    sigma = SigmaMap.random(4, 2, 0)
    assert centroids(sigma, [0], [1, 2, 3]) is None
    assert centroids(sigma, [0, 1, 2], [3]) is None


def test_one_step_worked_example():
    # k = 1: a=0, b=2 active; c=5, d=7 inactive. Scalar hand evaluation is the oracle.
    w_ref, v_ref = scalar_step([0.0, 2.0, 5.0, 7.0], [0.0] * 4, [0, 1], [2, 3])
    assert v_ref[0] == pytest.approx(6.0)
    assert v_ref[2] == pytest.approx(-2.5)
    assert w_ref[0] == pytest.approx(0.006)
    assert w_ref[2] == pytest.approx(4.9975)

    sigma = SigmaMap(w=np.array([[0.0], [2.0], [5.0], [7.0]]), v=np.zeros((4, 1)))
    out = step(sigma, np.array([1.0, 0.5, 0.0, 0.0]))
    scale = max(abs(x) for x in w_ref)
    np.testing.assert_allclose(out.v[:, 0], v_ref, rtol=0, atol=1e-12)
    np.testing.assert_allclose(out.w[:, 0], np.array(w_ref) / scale, rtol=0, atol=1e-12)


def test_coincident_point_stays_finite():
    # w_0 sits on the active centroid
    w = np.array([[1.0, 1.0], [1.0, 1.0], [-1.0, 0.5], [0.3, -1.0]])
    sigma = SigmaMap(w=w, v=np.zeros((4, 2)))
    out = step(sigma, np.array([1.0, 0.5, 0.0, 0.0]))
    assert np.isfinite(out.w).all() and np.isfinite(out.v).all()


def test_skip_is_identity():
    sigma = SigmaMap.random(4, 3, 1)
    before_w, before_v = sigma.w.copy(), sigma.v.copy()
    out = step(sigma, np.array([1.0, 0.0, 0.0, 0.0]))
    assert np.array_equal(out.w, before_w) and np.array_equal(out.v, before_v)


def test_non_finite_rejected():
    sigma = SigmaMap.random(4, 2, 0)
    sigma.w[0, 0] = np.nan
    with pytest.raises(FloatingPointError):
        step(sigma, np.array([1.0, 0.5, 0.0, 0.0]))


def test_normalize_examples():
    out = normalize(SigmaMap(w=np.array([[0.5, -2.0]]), v=np.ones((1, 2))))
    assert out.w.tolist() == [[0.25, -1.0]]
    assert out.v.tolist() == [[1.0, 1.0]]
    unit = SigmaMap(w=np.array([[1.0, -0.5], [0.2, 0.1]]), v=np.zeros((2, 2)))
    assert np.array_equal(normalize(unit).w, unit.w)
    zero = SigmaMap(w=np.zeros((2, 2)), v=np.zeros((2, 2)))
    assert np.array_equal(normalize(zero).w, zero.w)


def test_config_validation():
    with pytest.raises(ValueError):
        DynamicsConfig(k=1)
    with pytest.raises(ValueError):
        DynamicsConfig(theta=0.0)
    with pytest.raises(ValueError):
        DynamicsConfig(mu2=-1.0)


def _reference_trajectory(seq, n, k, seed, cfg_s):
    sigma = SigmaMap.random(n, k, seed)
    cfg = DynamicsConfig(k=k)
    for state in encode_sequence(seq, cfg_s):
        sigma = step(sigma, state, cfg)
        sigma = SigmaMap(sigma.w, sigma.v, sigma.step + 1)
    return sigma


@pytest.mark.parametrize("tstep", [1, 3, 10])
def test_compiled_kernel_matches_reference(tstep):
    rng = np.random.default_rng(tstep)
    n, k = 6, 3
    seq = rng.integers(0, n, 150)
    cfg_s = SequenceConfig(n=n, tau=seq.size, tstep=tstep, m=10)
    ref = _reference_trajectory(seq, n, k, 7, cfg_s)
    fast = run(seq, cfg_s, DynamicsConfig(k=k), seed=7)[-1]
    assert fast.step == ref.step == seq.size * tstep
    np.testing.assert_allclose(fast.w, ref.w, rtol=0, atol=1e-9)


def test_run_is_deterministic():
    rng = np.random.default_rng(0)
    seq = rng.integers(0, 5, 500)
    cfg_s = SequenceConfig(n=5, tau=500)
    a = run(seq, cfg_s, DynamicsConfig(), seed=11, snapshot_every=700)
    b = run(seq, cfg_s, DynamicsConfig(), seed=11, snapshot_every=700)
    assert [s.step for s in a] == [s.step for s in b]
    assert all(np.array_equal(x.w, y.w) and np.array_equal(x.v, y.v) for x, y in zip(a, b))


def test_snapshot_schedule():
    seq = np.arange(50) % 4
    snaps = run(seq, SequenceConfig(n=4, tau=50), DynamicsConfig(), seed=0, snapshot_every=120)
    assert [s.step for s in snaps] == [120, 240, 360, 480, 500]


def test_chunked_feeding_equals_single_pass():
    rng = np.random.default_rng(5)
    seq = rng.integers(0, 6, 400)
    cfg_s = SequenceConfig(n=6, tau=400)
    one = run(seq, cfg_s, DynamicsConfig(), seed=2)[-1]
    sim = Simulator(SigmaMap.random(6, 5, 2), cfg_s, DynamicsConfig())
    for part in np.array_split(seq, 7):
        sim.feed(part)
    assert np.array_equal(sim.sigma.w, one.w)


def test_run_rejects_bad_input():
    cfg_s = SequenceConfig(n=3, tau=5)
    with pytest.raises(ValueError):
        run([], cfg_s)
    with pytest.raises(ValueError):
        run([0, 3], cfg_s)
    with pytest.raises(ValueError):
        run([0, 1], cfg_s, DynamicsConfig(k=4), init=SigmaMap.random(3, 2, 0))


def test_permutation_equivariance():
    rng = np.random.default_rng(8)
    n = 7
    seq = rng.integers(0, n, 800)
    perm = rng.permutation(n)
    cfg_s = SequenceConfig(n=n, tau=seq.size)
    init = SigmaMap.random(n, 4, 3)
    permuted_init = SigmaMap(w=np.empty_like(init.w), v=np.zeros_like(init.v))
    permuted_init.w[perm] = init.w
    base = run(seq, cfg_s, DynamicsConfig(k=4), init=init)[-1]
    moved = run(perm[seq], cfg_s, DynamicsConfig(k=4), init=permuted_init)[-1]
    np.testing.assert_allclose(moved.w[perm], base.w, rtol=0, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 9), st.integers(2, 5), st.integers(1, 12), st.integers(0, 2**31))
def test_normalized_after_every_applied_step(n, k, tstep, seed):
    rng = np.random.default_rng(seed)
    seq = rng.integers(0, n, 60)
    cfg_s = SequenceConfig(n=n, tau=seq.size, tstep=tstep)
    sim = Simulator(SigmaMap.random(n, k, seed), cfg_s, DynamicsConfig(k=k))
    for i in range(seq.size):
        before = sim.sigma.copy()
        sim.feed(seq[i:i + 1])
        w = sim.sigma.w
        assert np.isfinite(w).all() and np.isfinite(sim.sigma.v).all()
        if not np.array_equal(w, before.w):
            assert abs(np.abs(w).max() - 1.0) <= 1e-12
