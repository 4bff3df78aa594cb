import random

import pytest

from bvreduce import (
    HbarModel,
    HbarSeries,
    InputError,
    Scalar,
    SuperPoly,
    action_build,
    hbar_eta,
    hbar_oracle,
    hbar_reduce,
    isserlis_moment,
    q,
    wick,
)
from bvreduce.hbar import hbar_reduce_series, model_differential
from bvreduce.verify import random_rational


def _model1(vertices=None):
    return HbarModel(1, [[1]], vertices)


def test_eta_square():
    x = SuperPoly.x(1, 0)
    xi = SuperPoly.xi(1, 0)
    assert hbar_eta(x**2, _model1()) == -(xi * x)


def test_eta_constant():
    assert hbar_eta(SuperPoly.one(1), _model1()).is_zero


def test_eta_two_variables():
    n = 2
    x0, x1 = SuperPoly.x(n, 0), SuperPoly.x(n, 1)
    xi0, xi1 = SuperPoly.xi(n, 0), SuperPoly.xi(n, 1)
    m = HbarModel(n, [[1, 0], [0, 1]])
    got = hbar_eta(x0 * x1, m)
    assert got == (xi0 * x1 + xi1 * x0).scale(Scalar(q(-1, 2)))


def test_eta_inverts_leading_term():
    # (sum a_ij x_i d/dxi_j) o eta = -id on positive-degree xi-free inputs
    rng = random.Random(71)
    n = 2
    m = HbarModel(n, [[2, 1], [1, 3]])
    from bvreduce.hbar import _big_l

    for _ in range(10):
        e = [0, 0]
        for _ in range(rng.randint(1, 5)):
            e[rng.randrange(2)] += 1
        v = SuperPoly.monomial(n, e, coeff=random_rational(rng, nonzero=True))
        assert _big_l(m, hbar_eta(v, m)) == -v


def test_reduce_one_is_one():
    m = _model1({3: SuperPoly.x(1, 0) ** 3})
    got = hbar_reduce(SuperPoly.one(1), m, 3).scalars()
    assert got == [Scalar(1), Scalar(0), Scalar(0), Scalar(0)]


def test_reduce_vertex_free_square():
    x = SuperPoly.x(1, 0)
    got = hbar_reduce(x**2, _model1(), 2).scalars()
    assert got == [Scalar(0), Scalar(1), Scalar(0)]


def test_reduce_cubic_vertex_linear_observable():
    # lambda = 1 vertex x^3/3!: the class of x starts (1/2) hbar
    x = SuperPoly.x(1, 0)
    m = _model1({3: x**3 * Scalar(q(1, 6))})
    got = hbar_reduce(x, m, 1).scalars()
    assert got == [Scalar(0), Scalar(q(1, 2))]


def test_reduce_matches_oracle_cubic():
    x = SuperPoly.x(1, 0)
    m = _model1({3: x**3 * Scalar(q(1, 6))})
    assert hbar_reduce(x, m, 3) == hbar_oracle(x, m, 3)


def test_reduce_matches_oracle_random():
    rng = random.Random(72)
    checked = 0
    for _ in range(6):
        n = rng.randint(1, 2)
        a = [[Scalar(0)] * n for _ in range(n)]
        for i in range(n):
            a[i][i] = random_rational(rng, 3, nonzero=True)
        for i in range(n):
            for j in range(i + 1, n):
                c = random_rational(rng, 2)
                a[i][j] = c
                a[j][i] = c
        try:
            vertices = {}
            for deg in (3, 4):
                p = SuperPoly.zero(n)
                from bvreduce.superpoly import monomials_of_degree

                for e in monomials_of_degree(n, deg):
                    if rng.random() < 0.5:
                        p = p + SuperPoly.monomial(n, e, coeff=random_rational(rng, 2))
                if not p.is_zero:
                    vertices[deg] = p
            m = HbarModel(n, a, vertices)
        except Exception:
            continue
        e = [0] * n
        for _ in range(rng.randint(0, 4)):
            e[rng.randrange(n)] += 1
        f = SuperPoly.monomial(n, e)
        K = rng.randint(0, 3)
        assert hbar_reduce(f, m, K) == hbar_oracle(f, m, K)
        checked += 1
    assert checked >= 3  # the agreement must actually have been exercised


def test_vertex_free_matches_quadratic_wick_term_by_term():
    # model a <-> action -1/2 x a x; hbar^k coefficient of x^{2k} equals the exact class
    x = SuperPoly.x(1, 0)
    m = _model1()
    a = action_build(x**2 * Scalar(q(-1, 2)))
    for k in range(4):
        series = hbar_reduce(x ** (2 * k), m, k).scalars()
        assert series[k] == wick(a, x ** (2 * k))
        assert all(not c for c in series[:k])


def test_exactness_under_model_differential():
    rng = random.Random(73)
    x = SuperPoly.x(1, 0)
    xi = SuperPoly.xi(1, 0)
    m = _model1({3: x**3 * Scalar(q(1, 6))})
    K = 3
    for _ in range(8):
        g = SuperPoly.zero(1)
        for _ in range(3):
            g = g + SuperPoly.monomial(1, (rng.randint(0, 4),), coeff=random_rational(rng))
        boundary = model_differential(m, xi * g, K)
        got = hbar_reduce_series(boundary, m)
        assert got == HbarSeries(1, K)


def test_odd_moments_vanish_with_even_vertices():
    x = SuperPoly.x(1, 0)
    m = _model1({4: x**4 * Scalar(q(1, 24))})
    for k in (1, 3, 5):
        assert hbar_reduce(x**k, m, 3) == HbarSeries(1, 3)
        assert hbar_oracle(x**k, m, 3) == HbarSeries(1, 3)


def test_linearity_of_reduction():
    x = SuperPoly.x(1, 0)
    m = _model1({3: x**3 * Scalar(q(1, 2))})
    f1, f2 = x, x**2
    lhs = hbar_reduce(f1 + 3 * f2, m, 3)
    rhs = hbar_reduce(f1, m, 3) + HbarSeries(1, 3, [c.scale(3) for c in hbar_reduce(f2, m, 3).coeffs])
    assert lhs == rhs


def test_one_loop_vacuum_term_vanishes():
    # single cubic vertex: the hbar^1 coefficient of class(1) is 0 by parity
    x = SuperPoly.x(1, 0)
    m = _model1({3: x**3 * Scalar(q(1, 6))})
    got = hbar_reduce(SuperPoly.one(1), m, 1).scalars()
    assert got == [Scalar(1), Scalar(0)]


def test_isserlis_values():
    cov = [[Scalar(1)]]
    assert isserlis_moment(cov, (4,)) == Scalar(3)
    assert isserlis_moment(cov, (6,)) == Scalar(15)
    assert isserlis_moment(cov, (3,)) == Scalar(0)
    cov2 = [[Scalar(1), Scalar(0)], [Scalar(0), Scalar(1)]]
    assert isserlis_moment(cov2, (2, 2)) == Scalar(1)
    assert isserlis_moment(cov2, (1, 1)) == Scalar(0)


def test_model_validation():
    x = SuperPoly.x(1, 0)
    with pytest.raises(InputError):
        HbarModel(1, [[1]], {2: x**2})  # vertex degree below 3
    with pytest.raises(InputError):
        HbarModel(1, [[1]], {4: x**3})  # inhomogeneous for its slot
    with pytest.raises(InputError):
        HbarModel(2, [[1, 2], [3, 4]])  # not symmetric
    with pytest.raises(InputError):
        hbar_reduce(x, _model1(), -1)
