import numpy as np
import pytest
from scipy.linalg import expm

from quadricdiff.generator import (
    apply_generator,
    build_Gk,
    moment,
    monomial_basis,
    poly_degree,
    poly_from_json,
    poly_to_json,
)
from quadricdiff.model import BallModel, SphereModel
from quadricdiff.skew import skew_dim

rng = np.random.default_rng(99)

SIG2, BJ, BB = 0.49, 0.1, -0.8


def jacobi():
    return BallModel(alpha=[[SIG2]], H=np.zeros((0, 0)), b=[BJ], B=[[BB]])


def sphere_bm(d):
    return SphereModel(H=np.eye(skew_dim(d)), B=-0.5 * (d - 1) * np.eye(d))


def ball_generic(d):
    return BallModel(alpha=np.eye(d), H=np.eye(skew_dim(d)), b=0.1 * np.eye(d)[0],
                     B=-d * np.eye(d))


def test_monomial_basis_sizes_and_order():
    b = monomial_basis(2, 1)
    assert b.exponents == ((0, 0), (1, 0), (0, 1))
    assert len(monomial_basis(2, 2)) == 6
    assert len(monomial_basis(6, 3)) == 84
    # graded: degrees never decrease; constant first
    for d, k in ((3, 4), (5, 2)):
        degs = [sum(e) for e in monomial_basis(d, k).exponents]
        assert degs[0] == 0
        assert degs == sorted(degs)


def test_apply_generator_constant_is_zero():
    for mdl in (jacobi(), sphere_bm(3), ball_generic(2)):
        out = apply_generator(mdl, (0,) * mdl.d)
        assert np.abs(out).max() == 0.0


def test_apply_generator_sphere_linear():
    # drift only: grad^2 of a coordinate vanishes
    mdl = sphere_bm(3)
    basis = monomial_basis(3, 1)
    for i in range(3):
        e = tuple(int(j == i) for j in range(3))
        vec = apply_generator(mdl, e)
        expected = np.zeros(len(basis))
        expected[basis.index(e)] = -1.0
        assert np.allclose(vec, expected, atol=0)


def test_apply_generator_jacobi_square():
    # oracle by hand: G x^2 = sigma^2 (1 - x^2) + 2x(b + Bx)
    p = apply_generator(jacobi(), (2,), as_dict=True)
    assert p[(0,)] == pytest.approx(SIG2)
    assert p[(1,)] == pytest.approx(2 * BJ)
    assert p[(2,)] == pytest.approx(2 * BB - SIG2)


def test_build_Gk_degree_zero():
    for mdl in (jacobi(), sphere_bm(4)):
        gk = build_Gk(mdl, 0)
        assert gk.G.shape == (1, 1) and gk.G[0, 0] == 0.0


def test_build_Gk_sphere_bm_k1():
    gk = build_Gk(sphere_bm(3), 1)
    assert np.allclose(gk.G, np.diag([0.0, -1.0, -1.0, -1.0]), atol=0)


def test_build_Gk_jacobi_k2_hand_matrix():
    gk = build_Gk(jacobi(), 2)
    expected = np.array([
        [0.0, BJ, SIG2],
        [0.0, BB, 2 * BJ],
        [0.0, 0.0, 2 * BB - SIG2],
    ])
    assert np.allclose(gk.G, expected, atol=0)


def test_degree_filtration():
    for mdl in (jacobi(), sphere_bm(3), ball_generic(3)):
        gk = build_Gk(mdl, 3)
        degs = np.array([sum(e) for e in gk.basis.exponents])
        nz_rows, nz_cols = np.nonzero(gk.G)
        assert np.all(degs[nz_rows] <= degs[nz_cols])


def test_constant_column_zero_and_moment_of_one():
    for mdl in (jacobi(), sphere_bm(3)):
        gk = build_Gk(mdl, 2)
        assert np.abs(gk.G[:, 0]).max() == 0.0
        x = np.zeros(mdl.d)
        if mdl.space == "sphere":
            x[0] = 1.0
        one = {(0,) * mdl.d: 1.0}
        for t in (0.0, 0.7, 3.0):
            assert moment(mdl, one, x, t) == pytest.approx(1.0, abs=1e-12)


def test_semigroup_property():
    for mdl in (jacobi(), sphere_bm(3)):
        G = build_Gk(mdl, 2).G
        s, t = 0.4, 0.9
        err = np.linalg.norm(expm((s + t) * G) - expm(s * G) @ expm(t * G))
        assert err <= 1e-10


def test_moment_sphere_bm_coordinate_decay():
    mdl = sphere_bm(3)
    x0 = np.array([1.0, 0.0, 0.0])
    q = {(1, 0, 0): 1.0}
    for t in (0.0, 0.25, 1.0, 2.0):
        assert moment(mdl, q, x0, t) == pytest.approx(np.exp(-t), abs=1e-12)


def test_moment_sphere_norm_invariant():
    mdl = sphere_bm(3)
    q = {(2, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 2): 1.0}
    for _ in range(5):
        x0 = rng.standard_normal(3)
        x0 /= np.linalg.norm(x0)
        for t in (0.3, 1.5):
            assert moment(mdl, q, x0, t, k=2) == pytest.approx(1.0, abs=1e-12)


def test_moment_argument_errors():
    mdl = sphere_bm(3)
    q = {(1, 0, 0): 1.0}
    with pytest.raises(ValueError):
        moment(mdl, q, np.array([1.0, 0, 0]), 1.0, k=0)       # degree above k
    with pytest.raises(ValueError):
        moment(mdl, q, np.array([2.0, 0, 0]), 1.0)            # off the sphere
    with pytest.raises(ValueError):
        moment(mdl, q, np.array([1.0, 0, 0]), -0.5)           # negative time
    with pytest.raises(ValueError):
        moment(jacobi(), {(1,): 1.0}, np.array([1.5]), 1.0)   # outside the ball


def test_moment_prebuilt_generator_consistency():
    mdl = jacobi()
    gk = build_Gk(mdl, 2)
    q = {(2,): 1.0}
    direct = moment(mdl, q, np.array([0.3]), 0.8)
    cached = moment(mdl, q, np.array([0.3]), 0.8, gk=gk)
    assert direct == pytest.approx(cached, abs=1e-14)


def test_poly_json_roundtrip_and_degree():
    q = {(1, 0, 0): 1.0, (0, 2, 0): -0.5}
    assert poly_from_json(poly_to_json(q)) == q
    assert poly_degree(q) == 2
    assert poly_degree({}) == 0
