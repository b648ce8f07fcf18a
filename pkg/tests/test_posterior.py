import numpy as np
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from mixreg.core import Posterior
from mixreg.posterior import flag_outliers, lambda_at_label, map_classify


def post(gamma, lam=None):
    gamma = np.atleast_2d(np.asarray(gamma, dtype=float))
    return Posterior(gamma, np.ones_like(gamma) if lam is None else np.atleast_2d(lam))


def test_map_examples():
    assert map_classify(post([0.3, 0.7]))[0] == 2
    assert map_classify(post([0.5, 0.5]))[0] == 1
    np.testing.assert_array_equal(map_classify(post(np.ones((4, 1)))), 1)


def test_flag_examples():
    lam = np.array([[0.97576, 0.2], [0.49, 0.9], [0.5, 0.1]])
    gamma = np.array([[0.9, 0.1], [0.8, 0.2], [0.7, 0.3]])
    flags = flag_outliers(post(gamma, lam))
    np.testing.assert_array_equal(flags, [False, True, False])


def test_flag_uses_supplied_labels():
    p = post([[0.9, 0.1]], [[0.9, 0.1]])
    assert not flag_outliers(p)[0]
    assert flag_outliers(p, labels=[2])[0]
    assert lambda_at_label(p, [2])[0] == 0.1


def test_custom_threshold():
    p = post([[1.0]], [[0.6]])
    assert flag_outliers(p, threshold=0.7)[0]
    assert not flag_outliers(p, threshold=0.6)[0]


def test_no_flags_without_contamination():
    rng = np.random.default_rng(0)
    g = rng.dirichlet(np.ones(3), size=50)
    assert not flag_outliers(post(g)).any()


rows = arrays(float, (6, 3), elements=st.floats(0.01, 1.0))


@given(rows, arrays(float, (6, 1), elements=st.floats(0.1, 100.0)))
def test_map_invariant_to_row_rescaling(g, c):
    g = g / g.sum(axis=1, keepdims=True)
    scaled = g * c
    np.testing.assert_array_equal(map_classify(post(g)), np.argmax(scaled, axis=1) + 1)


@given(rows, arrays(float, (6, 3), elements=st.floats(0, 1)))
def test_flags_match_definition(g, lam):
    p = Posterior(g / g.sum(axis=1, keepdims=True), lam)
    labels = map_classify(p)
    expected = lam[np.arange(6), labels - 1] < 0.5
    np.testing.assert_array_equal(flag_outliers(p), expected)


def test_audit_clean_and_each_violation():
    from mixreg.core import SpcgmrParams
    from mixreg.kernel import LocalGrid
    from mixreg.posterior import audit
    grid = LocalGrid([0.0, 1.0])
    good = SpcgmrParams([0.4, 0.6], [1.0, 2.0], grid, np.zeros((2, 2)), [0.9, 0.9], [2.0, 3.0])
    p = Posterior(np.array([[0.3, 0.7]]), np.array([[0.5, 1.0]]))
    assert audit(good, p, 0.5) == []
    assert audit(good, p, 1.5) == ["var_floor"]
    assert audit(good, Posterior(np.array([[0.3, 0.8]]), p.lam), 0.5) == ["gamma_rowsum"]
    assert audit(good, Posterior(p.gamma, np.array([[1.2, 0.0]])), 0.5) == ["lambda_range"]
    object.__setattr__(good, "eta", np.array([0.9, 3.0]))
    assert audit(good, p, 0.5) == ["eta_below_one"]
