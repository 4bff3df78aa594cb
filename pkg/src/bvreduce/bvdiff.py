"""The action data type and the differentials d_cl, div, d_bv.

An Action packages a polynomial s with its homogeneous decomposition, the
diagonal/mixed split of the top part, precomputed gradients, and the quadratic
normal form when d = 2.  The differentials act on SuperPoly values and never
mutate shared state.
"""
from __future__ import annotations

from math import factorial

from .errors import InputError
from .scalars import Scalar, q
from .superpoly import SuperPoly


class Action:
    """Polynomial action s with degree d and all decompositions precomputed.

    Fields:
      n, d          variable count and maximal total degree (d >= 2)
      s             the action itself (no xi content)
      parts         map k -> homogeneous piece s^(k)
      top           s^(d), the top part
      diag, mix     top = diag + mix; diag = sum_i a_i x_i^d / d!, every mix
                    monomial involves at least two variables
      diag_coeffs   the sequence a_1..a_n (d! times the x_i^d coefficient)
      grad*         gradients of s, top, diag, mix and of the lower part s - top
      quad          for d = 2 only: (s2 matrix, s1 vector, s0 constant) with
                    s = 1/2 x^T s2 x + s1 . x + s0
    """

    def __init__(self, s: SuperPoly):
        if any(mask for _, mask in s.terms):
            raise InputError("action must not contain xi variables")
        d = s.max_xdeg()
        if d < 2:
            raise InputError("action must have total degree >= 2")
        self.n = s.n
        self.d = d
        self.s = s
        self.parts = s.xdeg_split()
        self.top = self.parts[d]

        diag = SuperPoly(s.n)
        mix = SuperPoly(s.n)
        for (e, m), c in self.top.terms.items():
            if sum(1 for p in e if p) <= 1:
                diag.terms[(e, m)] = c
            else:
                mix.terms[(e, m)] = c
        self.diag = diag
        self.mix = mix
        fact = factorial(d)
        self.diag_coeffs = tuple(
            Scalar.of(fact) * diag.coeff(tuple(d if j == i else 0 for j in range(s.n)))
            for i in range(s.n)
        )

        self.grad = tuple(s.dx(i) for i in range(s.n))
        self.grad_top = tuple(self.top.dx(i) for i in range(s.n))
        self.grad_diag = tuple(diag.dx(i) for i in range(s.n))
        self.grad_mix = tuple(mix.dx(i) for i in range(s.n))
        low = s - self.top
        self.low = low
        self.grad_low = tuple(low.dx(i) for i in range(s.n))

        self.quad = self._quadratic_form() if d == 2 else None
        self._session = None  # lazily built reduction session (reduce module)

    def _quadratic_form(self):
        n = self.n
        two = self.parts.get(2, SuperPoly.zero(n))
        s2 = [[Scalar(0)] * n for _ in range(n)]
        for (e, _), c in two.terms.items():
            idx = [i for i, p in enumerate(e) if p]
            if len(idx) == 1:
                i = idx[0]
                s2[i][i] = c * 2
            else:
                i, j = idx
                s2[i][j] = c
                s2[j][i] = c
        one = self.parts.get(1, SuperPoly.zero(n))
        s1 = [one.coeff(tuple(1 if j == i else 0 for j in range(n))) for i in range(n)]
        s0 = self.parts.get(0, SuperPoly.zero(n)).coeff((0,) * n)
        return s2, s1, s0

    def has_mix(self) -> bool:
        return not self.mix.is_zero

    def has_lower(self) -> bool:
        return not self.low.is_zero

    def is_homogeneous(self) -> bool:
        return not self.has_lower()

    def __repr__(self):
        return f"Action(n={self.n}, d={self.d}, s={self.s.text()})"


def action_build(s: SuperPoly, n: int | None = None) -> Action:
    """Build an Action from a xi-free, nonconstant SuperPoly of degree >= 2."""
    if n is not None and n != s.n:
        raise InputError(f"declared n={n} does not match polynomial with n={s.n}")
    return Action(s)


def _contract(grads, v: SuperPoly) -> SuperPoly:
    """sum_i grads[i] * dxi(v, i): the odd contraction common to all d_* maps."""
    out = SuperPoly.zero(v.n)
    for i, g in enumerate(grads):
        if g.is_zero:
            continue
        dv = v.dxi(i)
        if not dv.is_zero:
            out = out + g * dv
    return out


def d_cl(a: Action, v: SuperPoly) -> SuperPoly:
    """Koszul differential sum_i (ds/dx_i) d/dxi_i; lowers homological degree by 1."""
    if v.n != a.n:
        raise ValueError("variable count mismatch")
    return _contract(a.grad, v)


def d_div(v: SuperPoly) -> SuperPoly:
    """Divergence sum_i d^2/(dx_i dxi_i); lowers weight by exactly d on xi terms."""
    out = SuperPoly.zero(v.n)
    for i in range(v.n):
        t = v.dxi(i).dx(i)
        if not t.is_zero:
            out = out + t
    return out


def d_bv(a: Action, v: SuperPoly) -> SuperPoly:
    """The full differential d_cl + div."""
    return d_cl(a, v) + d_div(v)


def d_top(a: Action, v: SuperPoly) -> SuperPoly:
    """Contraction with the top part only; preserves weight."""
    return _contract(a.grad_top, v)


def d_diag(a: Action, v: SuperPoly) -> SuperPoly:
    return _contract(a.grad_diag, v)


def d_mix(a: Action, v: SuperPoly) -> SuperPoly:
    return _contract(a.grad_mix, v)


def d_low(a: Action, v: SuperPoly) -> SuperPoly:
    """Contraction with s - s^(d); strictly lowers weight when present."""
    return _contract(a.grad_low, v)
