"""Asymptotic reduction of observables over a truncated hbar series.

The model is a nondegenerate quadratic pairing a together with vertex
polynomials of degree >= 3; the differential being inverted is

    L - B - hbar * div,
    L = sum a_ij x_i d/dxi_j,   B = sum_j (dU/dx_j) d/dxi_j,

with U the sum of the vertex polynomials.  Reduction rewrites an observable
modulo the image of this differential until only constants survive: each pass
removes one x factor and either sprouts vertex legs (same hbar order, higher
x-degree) or fuses two legs (one more hbar, two fewer x).  This is the usual
Feynman-diagram sum evaluated without ever drawing a diagram.

Termination given truncation order K: a term at hbar-order k with x-degree m
can only reach the constants at order >= k + m/2, so anything with
m > 2(K - k) is dropped; on the survivors the pair (2(K - k) - m, m) decreases
lexicographically at every step (vertex steps lower the first entry, fuse
steps keep it and lower the second), so the rewriting halts.
"""
from __future__ import annotations

from functools import lru_cache
from math import factorial

from .errors import InputError
from .linalg import invert
from .scalars import Scalar, q
from .superpoly import SuperPoly


class HbarModel:
    """Quadratic pairing plus vertex polynomials sum b x...x / l!."""

    def __init__(self, n: int, a, vertices=None):
        self.n = n
        rows = [[Scalar.of(v) for v in row] for row in a]
        if len(rows) != n or any(len(r) != n for r in rows):
            raise InputError("pairing matrix must be n x n")
        for i in range(n):
            for j in range(i):
                if rows[i][j] != rows[j][i]:
                    raise InputError("pairing matrix must be symmetric")
        self.a = rows
        self.ainv = invert(rows)  # SingularMatrix propagates
        verts: dict[int, SuperPoly] = {}
        for deg, p in (vertices or {}).items():
            deg = int(deg)
            if p.is_zero:
                continue
            if deg < 3:
                raise InputError("vertex degree must be at least 3")
            if p.n != n:
                raise InputError("vertex variable count mismatch")
            if any(mask for _, mask in p.terms):
                raise InputError("vertices must be xi-free")
            if any(sum(e) != deg for e, _ in p.terms):
                raise InputError(f"vertex of declared degree {deg} is not homogeneous")
            verts[deg] = p
        self.vertices = verts
        u = SuperPoly.zero(n)
        for p in verts.values():
            u = u + p
        self.grad_u = tuple(u.dx(j) for j in range(n))
        self.max_vertex_degree = max(verts) if verts else 0


class HbarSeries:
    """Coefficients of hbar^0 .. hbar^K; arithmetic drops orders beyond K."""

    __slots__ = ("n", "K", "coeffs")

    def __init__(self, n: int, K: int, coeffs=None):
        if K < 0:
            raise InputError("truncation order must be non-negative")
        self.n = n
        self.K = K
        if coeffs is None:
            self.coeffs = [SuperPoly.zero(n) for _ in range(K + 1)]
        else:
            coeffs = list(coeffs)
            if len(coeffs) != K + 1:
                raise InputError("need exactly K+1 coefficients")
            self.coeffs = coeffs

    @staticmethod
    def of_scalars(n: int, K: int, values) -> "HbarSeries":
        return HbarSeries(n, K, [SuperPoly.const(n, Scalar.of(v)) for v in values])

    def scalars(self) -> list[Scalar]:
        out = []
        for p in self.coeffs:
            if any(e != (0,) * self.n or m for (e, m) in p.terms):
                raise ValueError("series has non-constant coefficients")
            out.append(p.coeff((0,) * self.n))
        return out

    def __add__(self, other: "HbarSeries") -> "HbarSeries":
        if other.K != self.K or other.n != self.n:
            raise ValueError("series mismatch")
        return HbarSeries(self.n, self.K, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __eq__(self, other):
        if not isinstance(other, HbarSeries):
            return NotImplemented
        return self.n == other.n and self.K == other.K and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.n, self.K, tuple(self.coeffs)))

    def shifted(self, j: int) -> "HbarSeries":
        """Multiply by hbar^j, dropping overflow."""
        out = [SuperPoly.zero(self.n) for _ in range(self.K + 1)]
        for k, p in enumerate(self.coeffs):
            if k + j <= self.K:
                out[k + j] = p
        return HbarSeries(self.n, self.K, out)

    def text(self) -> str:
        return " ; ".join(f"h^{k}: {p.text()}" for k, p in enumerate(self.coeffs))

    def __repr__(self):
        return f"HbarSeries({self.text()})"


def _big_l(m: HbarModel, v: SuperPoly) -> SuperPoly:
    out = SuperPoly.zero(m.n)
    for j in range(m.n):
        dv = v.dxi(j)
        if dv.is_zero:
            continue
        for i in range(m.n):
            c = m.a[i][j]
            if c:
                out = out + (SuperPoly.x(m.n, i) * dv).scale(c)
    return out


def _big_b(m: HbarModel, v: SuperPoly) -> SuperPoly:
    out = SuperPoly.zero(m.n)
    for j in range(m.n):
        g = m.grad_u[j]
        if g.is_zero:
            continue
        dv = v.dxi(j)
        if not dv.is_zero:
            out = out + g * dv
    return out


def _div(v: SuperPoly) -> SuperPoly:
    out = SuperPoly.zero(v.n)
    for i in range(v.n):
        t = v.dxi(i).dx(i)
        if not t.is_zero:
            out = out + t
    return out


def model_differential(m: HbarModel, v: SuperPoly, K: int) -> HbarSeries:
    """Apply L - B - hbar*div to a polynomial, as a truncated series."""
    out = HbarSeries(m.n, K)
    out.coeffs[0] = _big_l(m, v) - _big_b(m, v)
    if K >= 1:
        out.coeffs[1] = -_div(v)
    return out


def hbar_eta(v: SuperPoly, m: HbarModel) -> SuperPoly:
    """Primitive for the leading term: -(1/l) sum (a^-1)_ij xi_i dv/dx_j per degree-l part.

    Satisfies L o hbar_eta = -id on xi-free polynomials of positive degree and
    kills constants.
    """
    if any(mask for _, mask in v.terms):
        raise InputError("hbar_eta expects homological degree 0")
    out = SuperPoly.zero(m.n)
    for ell, part in v.xdeg_split().items():
        if ell == 0:
            continue
        piece = SuperPoly.zero(m.n)
        for j in range(m.n):
            dp = part.dx(j)
            if dp.is_zero:
                continue
            for i in range(m.n):
                c = m.ainv[i][j]
                if c:
                    piece = piece + (SuperPoly.xi(m.n, i) * dp).scale(c)
        out = out + piece.scale(Scalar(q(-1, ell)))
    return out


def hbar_reduce(f: SuperPoly, m: HbarModel, K: int) -> HbarSeries:
    """The class of f modulo the truncated differential, as a Scalar series.

    Repeatedly strips the constant term and replaces the rest v by
    (delta o eta)(v) with delta = -B - hbar*div; the series of stripped
    constants is the answer.  hbar_reduce(1) == 1 exactly.
    """
    if K < 0:
        raise InputError("truncation order must be non-negative")
    if f.n != m.n:
        raise ValueError("variable count mismatch")
    if any(mask for _, mask in f.terms):
        raise InputError("observables must be xi-free")
    result = [Scalar(0)] * (K + 1)
    zero_exp = (0,) * m.n

    def prune(p: SuperPoly, k: int) -> SuperPoly:
        cut = 2 * (K - k)
        kept = {key: c for key, c in p.terms.items() if sum(key[0]) <= cut}
        return SuperPoly(m.n, kept)

    work: dict[int, SuperPoly] = {0: prune(f, 0)}
    max_degree = max((sum(e) for e, _ in f.terms), default=0) + 2 * K * max(
        2, m.max_vertex_degree
    )
    guard = (2 * K + 2) * (max_degree + 2) + 4
    for _ in range(guard):
        if not any(not p.is_zero for p in work.values()):
            return HbarSeries.of_scalars(m.n, K, result)
        nxt: dict[int, SuperPoly] = {}
        for k, p in sorted(work.items()):
            if p.is_zero:
                continue
            c0 = p.coeff(zero_exp)
            if c0:
                result[k] = result[k] + c0
                p = p - SuperPoly.const(m.n, c0)
            if p.is_zero:
                continue
            e = hbar_eta(p, m)
            vert = prune(-_big_b(m, e), k)
            if not vert.is_zero:
                nxt[k] = nxt.get(k, SuperPoly.zero(m.n)) + vert
            if k + 1 <= K:
                fuse = prune(-_div(e), k + 1)
                if not fuse.is_zero:
                    nxt[k + 1] = nxt.get(k + 1, SuperPoly.zero(m.n)) + fuse
        work = nxt
    raise AssertionError("rewriting exceeded its termination bound; this is a bug")


def hbar_reduce_series(series: HbarSeries, m: HbarModel) -> HbarSeries:
    """Linear extension of hbar_reduce to truncated series inputs."""
    out = HbarSeries(m.n, series.K)
    for k, p in enumerate(series.coeffs):
        if p.is_zero:
            continue
        red = hbar_reduce(p, m, series.K - k)
        padded = HbarSeries(m.n, series.K, red.coeffs + [SuperPoly.zero(m.n)] * k)
        out = out + padded.shifted(k)
    return out


def isserlis_moment(cov_rows, alpha: tuple[int, ...]) -> Scalar:
    """Gaussian moment E[x^alpha] for a covariance matrix, by pair recursion."""
    cov = tuple(tuple(Scalar.of(v) for v in row) for row in cov_rows)
    return _isserlis(cov, tuple(alpha))


@lru_cache(maxsize=None)
def _isserlis(cov, alpha: tuple[int, ...]) -> Scalar:
    total_deg = sum(alpha)
    if total_deg == 0:
        return Scalar(1)
    if total_deg % 2:
        return Scalar(0)
    i = next(k for k, a in enumerate(alpha) if a > 0)
    beta = list(alpha)
    beta[i] -= 1
    acc = Scalar(0)
    for j, bj in enumerate(beta):
        if bj and cov[i][j]:
            gamma = list(beta)
            gamma[j] -= 1
            acc = acc + cov[i][j] * bj * _isserlis(cov, tuple(gamma))
    return acc


def hbar_oracle(f: SuperPoly, m: HbarModel, K: int) -> HbarSeries:
    """Perturbative Gaussian check: <f e^U> / <e^U> with propagator hbar * a^{-1}.

    Independent of the rewriting route: vertex factors are expanded as
    polynomial powers and all moments evaluated by Isserlis pairings.
    """
    if K < 0:
        raise InputError("truncation order must be non-negative")
    if any(mask for _, mask in f.terms):
        raise InputError("observables must be xi-free")
    cov = tuple(tuple(v for v in row) for row in m.ainv)
    u = SuperPoly.zero(m.n)
    for p in m.vertices.values():
        u = u + p

    def bracket(g: SuperPoly) -> list[Scalar]:
        # <g e^{U/hbar}>_0 as a truncated series; each monomial of degree D in
        # the r-th vertex power contributes at hbar^(D/2 - r)
        out = [Scalar(0)] * (K + 1)
        rmax = 2 * K if not u.is_zero else 0
        upow = SuperPoly.one(m.n)
        for r in range(rmax + 1):
            inv_fact = Scalar(q(1, factorial(r)))
            prod = g * upow
            for (e, _), c in prod.terms.items():
                deg = sum(e)
                if deg % 2:
                    continue
                p = deg // 2 - r
                if p < 0:
                    raise AssertionError("negative hbar power; vertex degrees < 3?")
                if p > K:
                    continue
                mom = _isserlis(cov, e)
                if mom:
                    out[p] = out[p] + c * inv_fact * mom
            if r < rmax:
                upow = upow * u
        return out

    num = bracket(f)
    den = bracket(SuperPoly.one(m.n))
    if not den[0]:
        raise AssertionError("normalization series has zero constant term")
    ratio = [Scalar(0)] * (K + 1)
    for k in range(K + 1):
        acc = num[k]
        for j in range(k):
            acc = acc - ratio[j] * den[k - j]
        ratio[k] = acc / den[0]
    return HbarSeries.of_scalars(m.n, K, ratio)
