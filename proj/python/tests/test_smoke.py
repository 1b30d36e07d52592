import math

import numpy as np
import pytest

import linsde


def ou():
    sde = linsde.LinearSde(np.array([[-1.0]]))
    sde.add_channel(np.zeros((1, 1)), np.ones(1))
    return sde, linsde.MomentState(np.zeros(1), np.zeros((1, 1)))


def test_kron_and_vec():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    b = np.eye(2)
    np.testing.assert_array_equal(linsde.kron(a, b), np.kron(a, b))
    x = np.arange(6.0).reshape(2, 3)
    np.testing.assert_array_equal(linsde.vec(x), x.flatten(order="F"))
    np.testing.assert_array_equal(linsde.unvec(linsde.vec(x), 2, 3), x)
    assert linsde.hilbert(3)[2, 2] == pytest.approx(0.2)


def test_expm_paths():
    a = np.array([[0.0, 1.0], [-2.0, -3.0]])
    e = linsde.expm(a, 0.5)
    v = np.array([1.0, -1.0])
    np.testing.assert_allclose(linsde.expm_action(a, v, 0.5), e @ v, rtol=1e-10)
    np.testing.assert_array_equal(linsde.expm(np.zeros((3, 3))), np.eye(3))


def test_ou_variance():
    sde, state = ou()
    assert linsde.classify(sde) == linsde.SdeClass.AutonomousAdditive
    r = linsde.moments_at(sde, state, 1.0)
    assert r.variance[0, 0] == pytest.approx((1 - math.exp(-2)) / 2, rel=1e-12)


def test_forms_grid_and_baseline_agree():
    sde, state = linsde.hilbert_test_equation(linsde.SdeClass.AutonomousMultiplicative, 2)
    direct = linsde.moments_at(sde, state, 1.0)
    general = linsde.moments_at(sde, state, 1.0, form=linsde.AugmentedForm.General)
    action = linsde.moments_at(sde, state, 1.0, method=linsde.ExpmMethod.ActionOnVector)
    grid = linsde.propagate_grid(sde, state, 0.0, 0.1, 10)
    base = linsde.moments_baseline(sde, state, 1.0)
    for other in (general, action, grid[-1], base):
        np.testing.assert_allclose(other.secmom, direct.secmom, rtol=1e-9)
        np.testing.assert_allclose(other.mean, direct.mean, rtol=1e-9)
    assert linsde.assemble(sde, state).size == 2 * 2 + 2 + 2


def test_oracles():
    sde, state = linsde.hilbert_test_equation(linsde.SdeClass.NonAutonomous, 2)
    exact = linsde.moments_at(sde, state, 1.0)
    rk4 = linsde.rk4_moments(sde, state, 1.0, 2000)
    np.testing.assert_allclose(rk4.secmom, exact.secmom, rtol=1e-9)
    mc = linsde.euler_maruyama_mc(sde, state, 1.0, linsde.McConfig(n_paths=4000, n_steps=100, seed=3))
    assert mc.n_paths == 4000
    assert np.all(np.abs(mc.mean - exact.mean) <= 5 * mc.stderr_mean + 0.05)


def test_model_text_round_trip_and_errors():
    sde, state = ou()
    text = linsde.serialize_model(sde, state)
    sde2, state2 = linsde.parse_model(text)
    np.testing.assert_array_equal(sde2.A, sde.A)
    with pytest.raises(linsde.ModelError, match="P0"):
        linsde.parse_model('{"d": 1, "A": [[-1]], "m0": [0]}')
    with pytest.raises(linsde.ModelError):
        linsde.moments_at(sde, state, -1.0)
