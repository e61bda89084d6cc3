import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airlearn.classifier import (
    ClassifierState,
    Weights,
    fit_air,
    fit_baseline,
    fit_joint_oracle,
    fold_phase,
    observe,
    observe_batch,
    predict,
    predict_batch,
    read_weights,
    write_weights,
)
from airlearn.errors import BadMagicError, ClassReappearedError, TruncatedFileError
from airlearn.features import FeatureSet, SyntheticSpec, synth_generate
from airlearn.linalg import relative_frobenius_error as rel

from .oracles import nearest_mean_predict, weighted_gradient


def random_set(rng, counts, dim, shift=0.0):
    y = np.repeat(np.arange(len(counts)), counts)
    X = rng.standard_normal((len(y), dim)) + shift * rng.standard_normal((len(counts), dim))[y]
    return FeatureSet(X, y)


def gcil_fit(fs, gamma=1.0, weighted=True):
    st_ = observe_batch(ClassifierState(fs.dim, gamma), fs)
    return fit_air(st_) if weighted else fit_baseline(st_)


# observe

def test_observe_single_item():
    st_ = observe(ClassifierState(2, 1.0), np.array([1.0, 2.0]), 0)
    s = st_.per_class[0]
    assert np.array_equal(s.A, [[1, 2], [2, 4]])
    assert np.array_equal(s.c, [1, 2]) and s.n == 1
    assert st_.seen_classes == 1


def test_observe_twice_doubles():
    st_ = ClassifierState(2, 1.0)
    for _ in range(2):
        observe(st_, np.array([1.0, 2.0]), 0)
    s = st_.per_class[0]
    assert s.n == 2 and np.array_equal(s.A, 2 * np.array([[1, 2], [2, 4]])) and np.array_equal(s.c, [2, 4])


def test_observe_matches_batch_products(rng):
    fs = random_set(rng, [400, 350, 250], 9)
    st_ = ClassifierState(9, 1.0)
    for x, y in fs:
        observe(st_, x, y)
    for label in range(3):
        Xy = fs.X[fs.y == label]
        assert rel(st_.per_class[label].A, Xy.T @ Xy) <= 1e-12
        assert rel(st_.per_class[label].c, Xy.sum(axis=0)) <= 1e-12
        assert st_.per_class[label].n == len(Xy)


def test_observe_batch_equals_observe(rng):
    fs = random_set(rng, [30, 5, 12], 6)
    a = ClassifierState(6, 1.0)
    for x, y in fs:
        observe(a, x, y)
    b = observe_batch(ClassifierState(6, 1.0), fs)
    for label in range(3):
        np.testing.assert_allclose(a.per_class[label].A, b.per_class[label].A, rtol=1e-13, atol=1e-13)
    assert a.class_counts().tolist() == b.class_counts().tolist()


def test_observe_rejects_bad_input():
    st_ = ClassifierState(2, 1.0)
    with pytest.raises(ValueError):
        observe(st_, np.array([np.nan, 1.0]), 0)
    with pytest.raises(ValueError):
        observe(st_, np.array([1.0, 1.0, 1.0]), 0)
    assert st_.seen_classes == 0


def test_seen_classes_tracks_max_label():
    st_ = ClassifierState(2, 1.0)
    observe(st_, np.ones(2), 4)
    observe(st_, np.ones(2), 1)
    assert st_.seen_classes == 5


def test_state_validation():
    with pytest.raises(ValueError):
        ClassifierState(2, 0.0)
    with pytest.raises(ValueError):
        ClassifierState(2, 1.0, mode="online")


# fit_air

def test_fit_air_scalar():
    st_ = observe(ClassifierState(1, 1.0), np.array([2.0]), 0)
    assert fit_air(st_).W[0, 0] == pytest.approx(0.4, abs=1e-15)


def test_duplication_cancels(rng):
    x0, x1 = rng.standard_normal(4), rng.standard_normal(4)
    once = ClassifierState(4, 1.0)
    observe(once, x0, 0)
    observe(once, x1, 1)
    dup = ClassifierState(4, 1.0)
    for _ in range(10):
        observe(dup, x0, 0)
    observe(dup, x1, 1)
    assert rel(fit_air(dup).W, fit_air(once).W) <= 1e-12


def test_fit_air_matches_joint_oracle(rng):
    fs = random_set(rng, [100, 50, 20, 5, 1], 16, shift=2.0)
    w = gcil_fit(fs, gamma=0.7)
    assert rel(w.W, fit_joint_oracle(fs, 0.7, weighted=True).W) <= 1e-9


def test_fit_empty_rejected():
    with pytest.raises(ValueError):
        fit_air(ClassifierState(3, 1.0))
    with pytest.raises(ValueError):
        fit_joint_oracle(FeatureSet.empty(3), 1.0)


def test_absent_class_gets_zero_column(rng):
    fs = random_set(rng, [10, 0, 7, 0], 5)
    w = gcil_fit(fs)
    assert w.num_classes == 3
    assert np.array_equal(w.W[:, 1], np.zeros(5))


def test_fit_gamma_override(rng):
    fs = random_set(rng, [20, 3], 4)
    st_ = observe_batch(ClassifierState(4, 1.0), fs)
    assert rel(fit_air(st_, gamma=5.0).W, fit_joint_oracle(fs, 5.0).W) <= 1e-10


# baseline

def test_balanced_reduction(rng):
    N = 25
    fs = random_set(rng, [N] * 4, 7, shift=1.0)
    st_ = observe_batch(ClassifierState(7, 0.3), fs)
    np.testing.assert_allclose(fit_air(st_).W, fit_baseline(st_, gamma=N * 0.3).W, rtol=0, atol=1e-9)


def test_baseline_single_sample_equals_air():
    st_ = observe(ClassifierState(3, 2.0), np.array([1.0, -1.0, 0.5]), 1)
    assert np.array_equal(fit_air(st_).W, fit_baseline(st_).W)


def test_baseline_matches_unweighted_oracle(rng):
    fs = random_set(rng, [60, 9, 3], 8)
    assert rel(gcil_fit(fs, 1.5, weighted=False).W, fit_joint_oracle(fs, 1.5, weighted=False).W) <= 1e-9


# joint oracle

def test_oracle_single_sample_matches_fit_air():
    fs = FeatureSet(np.array([[0.5, 2.0, -1.0]]), np.array([2]))
    assert rel(fit_joint_oracle(fs, 1.0).W, gcil_fit(fs).W) <= 1e-15


@pytest.mark.parametrize("weighted", [True, False])
def test_gradient_zero(rng, weighted):
    fs = random_set(rng, [80, 30, 4], 10, shift=1.5)
    w = fit_joint_oracle(fs, 0.9, weighted=weighted)
    g = weighted_gradient(fs.X, fs.y, w.W, 0.9, weighted=weighted)
    assert np.linalg.norm(g) / np.linalg.norm(w.W) <= 1e-8


def test_oracle_permutation_invariant(rng):
    fs = random_set(rng, [40, 17, 6], 8)
    perm = rng.permutation(len(fs))
    assert rel(fit_joint_oracle(fs.take(perm), 1.0).W, fit_joint_oracle(fs, 1.0).W) <= 1e-12


# CIL folding

def test_fold_empty_phase_is_noop():
    st_ = ClassifierState(3, 1.0, mode="cil")
    before = (st_.folded_A.copy(), st_.folded_C.copy())
    fold_phase(st_)
    assert np.array_equal(st_.folded_A, before[0]) and np.array_equal(st_.folded_C, before[1])
    assert st_.phases_folded == 0


def test_fold_requires_cil_mode():
    with pytest.raises(ValueError):
        fold_phase(ClassifierState(3, 1.0))


def test_two_disjoint_phases_match_gcil(rng):
    p1 = random_set(rng, [50, 10], 6, shift=1.0)
    p2 = FeatureSet(rng.standard_normal((23, 6)), np.repeat([2, 3, 4], [3, 15, 5]))
    cil = ClassifierState(6, 1.0, mode="cil")
    gcil = ClassifierState(6, 1.0)
    for p in (p1, p2):
        observe_batch(cil, p)
        observe_batch(gcil, p)
        assert rel(fit_air(cil).W, fit_air(gcil).W) <= 1e-10
        assert rel(fit_baseline(cil).W, fit_baseline(gcil).W) <= 1e-10
        fold_phase(cil)
    assert not cil.per_class
    assert rel(fit_air(cil).W, fit_air(gcil).W) <= 1e-10


def test_reappearing_class_guard(rng):
    st_ = ClassifierState(3, 1.0, mode="cil")
    observe(st_, rng.standard_normal(3), 3)
    fold_phase(st_)
    with pytest.raises(ClassReappearedError) as exc:
        observe(st_, rng.standard_normal(3), 3)
    assert exc.value.label == 3 and exc.value.phase == 2
    assert "GCIL" in str(exc.value)
    with pytest.raises(ClassReappearedError):
        observe_batch(st_, FeatureSet(rng.standard_normal((2, 3)), [0, 3]))
    assert 0 not in st_.per_class  # batch rejected before any update


def test_gcil_allows_reappearance(rng):
    st_ = ClassifierState(3, 1.0)
    observe(st_, rng.standard_normal(3), 3)
    observe(st_, rng.standard_normal(3), 3)
    assert st_.per_class[3].n == 2


# predict

def test_predict_identity():
    assert predict(Weights(np.eye(2)), np.array([0.0, 1.0])) == 1


def test_predict_tie_breaks_low():
    w = Weights(np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))
    assert predict(w, np.array([1.0, 0.5])) == 0
    assert predict_batch(w, np.array([[1.0, 1.0]])).tolist() == [0]


def test_predict_rejects_non_finite():
    with pytest.raises(ValueError):
        predict(Weights(np.eye(2)), np.array([np.inf, 0.0]))


def test_predict_agrees_with_nearest_mean():
    spec = SyntheticSpec(4, 12, class_mean_radius=8.0, noise_sigma=1.0, seed=3)
    train = synth_generate(spec, [80, 60, 40, 20])
    test = synth_generate(spec, [50] * 4, draw=1)
    w = gcil_fit(train, gamma=1.0)
    agree = np.mean(predict_batch(w, test.X) == nearest_mean_predict(train.X, train.y, test.X))
    assert agree >= 0.99


def test_weights_immutable():
    w = Weights(np.eye(2))
    with pytest.raises(ValueError):
        w.W[0, 0] = 3.0


# properties

@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.lists(st.integers(1, 30), min_size=2, max_size=5))
def test_order_invariance_property(seed, counts):
    r = np.random.default_rng(seed)
    fs = random_set(r, counts, 5, shift=1.0)
    base = gcil_fit(fs)
    perm = gcil_fit(fs.take(r.permutation(len(fs))))
    assert rel(perm.W, base.W) <= 1e-10
    probe = r.standard_normal((50, 5))
    assert np.array_equal(predict_batch(base, probe), predict_batch(perm, probe))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 8), st.integers(0, 3))
def test_duplication_neutrality_property(seed, m, cls):
    r = np.random.default_rng(seed)
    fs = random_set(r, [7, 3, 11, 2], 4, shift=1.0)
    idx = np.nonzero(fs.y == cls)[0]
    dup = FeatureSet.concat([fs] + [fs.take(idx)] * (m - 1))
    assert rel(gcil_fit(dup).W, gcil_fit(fs).W) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.floats(1e-2, 1e2))
def test_gradient_zero_property(seed, gamma):
    r = np.random.default_rng(seed)
    fs = random_set(r, r.integers(1, 40, size=4).tolist(), 6, shift=1.0)
    w = gcil_fit(fs, gamma)
    g = weighted_gradient(fs.X, fs.y, w.W, gamma)
    assert np.linalg.norm(g) / np.linalg.norm(w.W) <= 1e-8


# AIRW

def test_weights_roundtrip(tmp_path, rng):
    w = Weights(rng.standard_normal((7, 3)))
    write_weights(tmp_path / "w.airw", w)
    back = read_weights(tmp_path / "w.airw")
    assert back.W.tobytes() == w.W.tobytes()
    data = (tmp_path / "w.airw").read_bytes()
    assert data[:4] == b"AIRW" and len(data) == 16 + 8 * 21


def test_weights_file_errors(tmp_path):
    path = tmp_path / "w.airw"
    write_weights(path, Weights(np.ones((2, 2))))
    data = path.read_bytes()
    path.write_bytes(b"AIRF" + data[4:])
    with pytest.raises(BadMagicError):
        read_weights(path)
    path.write_bytes(data[:-3])
    with pytest.raises(TruncatedFileError):
        read_weights(path)
