import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from varcomplex.errors import InvalidArgument, UnsupportedConfiguration
from varcomplex.fields import CompactField, bump, sample_field
from varcomplex.groups import GL, SL, Conformal, Sp, algebra_residual
from varcomplex.quadrature import Domain

GROUPS = [GL(2), GL(3), SL(2), SL(3), Sp(2), Sp(4)]


def _grid(dom, res=16):
    return dom.with_resolution(res).nodes()[0]


def test_bump_examples():
    c = np.array([0.3, -0.2])
    v, g = bump(c, 0.5, c)
    assert v == pytest.approx(math.exp(-1))
    assert np.all(g == 0)
    v, g = bump(c, 0.5, c + [0.5, 0.0])
    assert v == 0 and np.all(g == 0)
    v, _ = bump(np.zeros(3), 1.0, np.array([0.5, 0, 0]))
    assert v == pytest.approx(0.26360, abs=1e-5)
    assert v == pytest.approx(math.exp(-4 / 3), rel=1e-14)


def test_bump_gradient_fd(rng):
    c = np.array([0.5, 0.5])
    x = rng.uniform(0.25, 0.75, (20, 2))
    h = 1e-6
    _, g = bump(c, 0.3, x)
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        fd = (bump(c, 0.3, x + e)[0] - bump(c, 0.3, x - e)[0]) / (2 * h)
        assert np.allclose(g[:, k], fd, atol=1e-7)


@pytest.mark.parametrize("g", GROUPS, ids=str)
def test_tangency_on_grid(g):
    dom = Domain.unit(g.n)
    f = sample_field(g, dom, 0.5, 3)
    J = f.gradient(_grid(dom, 16 if g.n == 2 else 12))
    assert np.max(algebra_residual(g, J)) <= 1e-10


def test_divergence_free_and_hamiltonian():
    dom = Domain.unit(2)
    f = sample_field(SL(2), dom, 0.5, 1)
    assert np.max(np.abs(f.divergence(_grid(dom, 32)))) <= 1e-12
    f = sample_field(Sp(2), dom, 0.5, 2)
    J = f.gradient(_grid(dom, 32))
    w = np.array([[0, 1], [-1, 0]])
    assert np.max(np.abs(J @ w + w @ np.swapaxes(J, -1, -2))) <= 1e-12


def test_conformal_is_zero():
    dom = Domain.unit(3)
    f = sample_field(Conformal(3), dom, 0.5, 0)
    x = _grid(dom, 8)
    assert np.all(f.value(x) == 0) and np.all(f.gradient(x) == 0)


def test_unsupported():
    with pytest.raises(UnsupportedConfiguration):
        sample_field(SL(4), Domain.unit(4), 0.1, 0)
    with pytest.raises(InvalidArgument):
        sample_field(SL(2), Domain.unit(3), 0.1, 0)
    with pytest.raises(InvalidArgument):
        sample_field(SL(2), Domain.unit(2), math.inf, 0)


@pytest.mark.parametrize("g", GROUPS, ids=str)
def test_gradient_matches_fd(g):
    dom = Domain.unit(g.n)
    f = sample_field(g, dom, 0.2, 5)
    lo, hi = f.support_box
    x = np.random.default_rng(0).uniform(lo, hi, (500, g.n))
    h = 1e-5
    J = f.gradient(x)
    for k in range(g.n):
        e = np.zeros(g.n)
        e[k] = h
        # five-point stencil: the plain central difference carries an h^2 error
        # of a few 1e-7 where the bump is steep
        fd = (-f.value(x + 2 * e) + 8 * f.value(x + e) - 8 * f.value(x - e) + f.value(x - 2 * e)) / (12 * h)
        assert np.max(np.abs(J[:, :, k] - fd)) <= 1e-8


@given(st.sampled_from(GROUPS), st.integers(0, 10_000))
def test_support_and_boundary(g, seed):
    dom = Domain.unit(g.n)
    f = sample_field(g, dom, 0.7, seed)
    lo, hi = f.support_box
    assert np.all(lo >= 0.05 - 1e-12) and np.all(hi <= 0.95 + 1e-12)
    rng = np.random.default_rng(seed)
    # boundary points and points outside the support ball
    x = rng.uniform(0, 1, (200, g.n))
    x[:50, 0] = 0.0
    x[50:100, 1] = 1.0
    out = ~f.support_mask(x)
    v, J = f.value_and_gradient(x)
    assert np.all(v[out] == 0) and np.all(J[out] == 0)
    assert out[:100].all()


@given(st.sampled_from(GROUPS), st.integers(0, 10_000), st.floats(0.01, 2.0))
def test_amplitude_linearity(g, seed, a):
    dom = Domain.unit(g.n)
    f1 = sample_field(g, dom, a, seed)
    f2 = sample_field(g, dom, 2 * a, seed)
    x = np.random.default_rng(seed).uniform(0, 1, (50, g.n))
    assert np.allclose(f2.value(x), 2 * f1.value(x), rtol=1e-13, atol=1e-15)
    assert np.allclose(f2.gradient(x), 2 * f1.gradient(x), rtol=1e-13, atol=1e-15)


def test_json_roundtrip():
    f = sample_field(SL(3), Domain.unit(3), 0.3, 9)
    g = CompactField.from_dict(f.to_dict())
    x = np.random.default_rng(1).uniform(0, 1, (20, 3))
    assert np.array_equal(f.value(x), g.value(x))
