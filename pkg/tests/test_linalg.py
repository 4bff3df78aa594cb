import random
from fractions import Fraction

import pytest

from bvreduce import Scalar, SingularMatrix, q
from bvreduce.linalg import invert, particular_solution, rank, solve_square


def _rand_scalar(rng, height=6, complex_part=True):
    re = Fraction(rng.randint(-height, height), rng.randint(1, 3))
    im = Fraction(rng.randint(-height, height), rng.randint(1, 3)) if complex_part and rng.random() < 0.4 else 0
    return Scalar(q(re.numerator, re.denominator), q(*(im.numerator, im.denominator)) if im else 0)


def _mat(rng, rows, cols, complex_part=True):
    return [[_rand_scalar(rng, complex_part=complex_part) for _ in range(cols)] for _ in range(rows)]


def _fraction_gauss_rank(m):
    """Plain Gaussian elimination over complex Fractions, the cross-check route."""
    m = [[complexfrac(v) for v in row] for row in m]
    rows, cols = len(m), len(m[0]) if m else 0
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c] != (0, 0)), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pr = m[r][c]
        for i in range(r + 1, rows):
            if m[i][c] == (0, 0):
                continue
            f = cdiv(m[i][c], pr)
            m[i] = [csub(a, cmul(f, b)) for a, b in zip(m[i], m[r])]
        r += 1
        if r == rows:
            break
    return r


def complexfrac(s: Scalar):
    return (Fraction(int(s.re.numerator), int(s.re.denominator)),
            Fraction(int(s.im.numerator), int(s.im.denominator)))


def cmul(x, y):
    return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def csub(x, y):
    return (x[0] - y[0], x[1] - y[1])


def cdiv(x, y):
    n = y[0] * y[0] + y[1] * y[1]
    return ((x[0] * y[0] + x[1] * y[1]) / n, (x[1] * y[0] - x[0] * y[1]) / n)


def test_rank_matches_fraction_oracle():
    rng = random.Random(21)
    for _ in range(25):
        rows, cols = rng.randint(1, 6), rng.randint(1, 6)
        m = _mat(rng, rows, cols)
        if rng.random() < 0.4 and rows > 1:
            # plant a dependent row
            c = _rand_scalar(rng)
            m[-1] = [c * v for v in m[0]]
        assert rank(m) == _fraction_gauss_rank(m)


def test_solve_square_random():
    rng = random.Random(22)
    for _ in range(20):
        k = rng.randint(1, 6)
        while True:
            a = _mat(rng, k, k)
            if rank(a) == k:
                break
        x_true = [_rand_scalar(rng) for _ in range(k)]
        b = [sum((a[i][j] * x_true[j] for j in range(k)), Scalar(0)) for i in range(k)]
        (x,) = solve_square(a, [b])
        assert x == x_true


def test_invert_round_trip():
    rng = random.Random(23)
    for _ in range(10):
        k = rng.randint(1, 5)
        while True:
            a = _mat(rng, k, k)
            if rank(a) == k:
                break
        inv = invert(a)
        for i in range(k):
            for j in range(k):
                s = sum((a[i][t] * inv[t][j] for t in range(k)), Scalar(0))
                assert s == (Scalar(1) if i == j else Scalar(0))


def test_singular_detected():
    a = [[Scalar(1), Scalar(2)], [Scalar(2), Scalar(4)]]
    with pytest.raises(SingularMatrix):
        solve_square(a, [[Scalar(1), Scalar(0)]])


def test_particular_solution_underdetermined():
    # x + y = 3 has the pivot solution x = 3, y = 0
    a = [[Scalar(1), Scalar(1)]]
    sol = particular_solution(a, [Scalar(3)])
    assert sol == [Scalar(3), Scalar(0)]


def test_particular_solution_inconsistent():
    a = [[Scalar(1), Scalar(1)], [Scalar(2), Scalar(2)]]
    assert particular_solution(a, [Scalar(1), Scalar(3)]) is None


def test_particular_solution_is_linear_in_rhs():
    # fixed pivots make the pseudo-solve linear, which the homotopy extension relies on
    rng = random.Random(24)
    a = _mat(rng, 3, 5)
    b1 = [sum((a[i][j] * _rand_scalar(rng) for j in range(5)), Scalar(0)) for i in range(3)]
    b2 = [sum((a[i][j] * _rand_scalar(rng) for j in range(5)), Scalar(0)) for i in range(3)]
    s1 = particular_solution(a, b1)
    s2 = particular_solution(a, b2)
    s12 = particular_solution(a, [u + v for u, v in zip(b1, b2)])
    assert s1 is not None and s2 is not None and s12 is not None
    assert s12 == [u + v for u, v in zip(s1, s2)]
