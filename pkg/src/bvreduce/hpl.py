"""Generic homological perturbation engine.

A retraction (tau, phi, eta) exhibits a complex of SuperPoly values as
homotopy equivalent to its degree-0 homology H.  The convention used
throughout the engine is

    tau o phi = id_H,        phi o tau - id_V = D o eta + eta o D,

and every transferred map below re-establishes exactly this convention for
the deformed differential.  Deforming D by a small delta produces

    tau' = tau o (id - delta o eta)^{-1}
    eta' = eta o (id - delta o eta)^{-1}
    phi' = phi            (H sits in degree 0, V in non-negative degrees,
                           so delta o phi = 0 and the transferred phi and
                           the transferred differential on H are unchanged)

Smallness of delta is certified in one of two ways:

  * "nilpotent": delta o eta strictly drops the weight grading, so the
    Neumann series terminates; a cap of weight(v) + 1 applications guards
    against a wrong declaration.
  * "weight_solve": delta o eta is weight-non-increasing; on each finite
    (homological degree, weight) slice the operator id - delta o eta is
    assembled in the monomial basis and solved exactly by fraction-free
    Gaussian elimination, with factored slices memoized.  Strictly
    weight-lowering leakage between slices is handled by block
    back-substitution from the top weight down.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable

from .errors import NonTerminating, NotGenericAtWeight, SingularMatrix
from .linalg import invert
from .scalars import Scalar
from .superpoly import Key, SuperPoly, monomials_of_degree, term_weight

NILPOTENT = "nilpotent"
WEIGHT_SOLVE = "weight_solve"

# When true, every LinearOp call re-checks its declared degree shift and
# weight change on the actual output.  Meant for the invariant test suite;
# too slow to leave on in production pipelines.
CHECK_DECLARED = False


@dataclass(frozen=True)
class LinearOp:
    """A Scalar-linear map on SuperPoly with declared grading behavior.

    degree_shift is the homological degree change; weight_change is an upper
    bound on the weight increase (0 means weight-non-increasing, negative
    means a strict drop by at least that amount).  d is the degree used for
    the weight grading.
    """

    fn: Callable[[SuperPoly], SuperPoly]
    degree_shift: int
    weight_change: int
    d: int
    name: str = ""

    def __call__(self, v: SuperPoly) -> SuperPoly:
        out = self.fn(v)
        if CHECK_DECLARED and not v.is_zero and not out.is_zero:
            for key in out.terms:
                h = key[1].bit_count()
                w = term_weight(key, self.d)
                ok = any(
                    k[1].bit_count() + self.degree_shift == h
                    and term_weight(k, self.d) + self.weight_change >= w
                    for k in v.terms
                )
                if not ok:
                    raise AssertionError(
                        f"operator {self.name or self.fn} violated its declaration on {key}"
                    )
        return out


def compose(outer: LinearOp, inner: LinearOp) -> LinearOp:
    return LinearOp(
        fn=lambda v: outer.fn(inner.fn(v)),
        degree_shift=outer.degree_shift + inner.degree_shift,
        weight_change=outer.weight_change + inner.weight_change,
        d=outer.d,
        name=f"{outer.name}*{inner.name}",
    )


def op_sum(a: LinearOp, b: LinearOp) -> LinearOp:
    return LinearOp(
        fn=lambda v: a.fn(v) + b.fn(v),
        degree_shift=a.degree_shift,
        weight_change=max(a.weight_change, b.weight_change),
        d=a.d,
        name=f"{a.name}+{b.name}",
    )


def neumann_apply(t: LinearOp, v: SuperPoly, d: int) -> SuperPoly:
    """(id - t)^{-1} v as the finite sum of t^k v for strictly weight-dropping t.

    Weight is a non-negative integer, so at most weight(v) + 1 applications can
    produce anything; exceeding the cap means the declaration was wrong and is
    a hard error, never a silent truncation.
    """
    if v.is_zero:
        return v
    cap = v.max_weight(d) + 1
    total = v
    g = v
    for _ in range(cap):
        g = t.fn(g)
        if g.is_zero:
            return total
        total = total + g
    raise NonTerminating(
        f"operator {t.name!r} declared weight change {t.weight_change} "
        f"but did not vanish after {cap} applications"
    )


def _xi_masks(n: int, h: int) -> list[int]:
    """All xi words with h factors among n variables, in canonical order."""
    if h == 0:
        return [0]
    masks = []
    for m in range(1 << n):
        if m.bit_count() == h:
            masks.append(m)
    masks.sort(key=lambda m: tuple(i for i in range(n) if m >> i & 1))
    return masks


def slice_basis(n: int, d: int, h: int, w: int) -> list[Key]:
    """Monomial basis of the (homological degree h, weight w) slice, lexicographic."""
    xdeg = w - (d - 1) * h
    if xdeg < 0 or h > n:
        return []
    keys = []
    for mask in _xi_masks(n, h):
        for e in monomials_of_degree(n, xdeg):
            keys.append((e, mask))
    keys.sort(key=lambda k: (k[0], k[1]))
    return keys


class SliceSolver:
    """Applies (id - t)^{-1} for a degree-preserving, weight-non-increasing t.

    Per (degree, weight) slice the matrix of id - t is inverted exactly once
    and memoized; concurrent readers see a consistent cache thanks to
    single-flight population under a lock.
    """

    def __init__(self, n: int, d: int, t: LinearOp):
        if t.degree_shift != 0:
            raise ValueError("slice solving needs a degree-preserving operator")
        if t.weight_change > 0:
            raise ValueError("slice solving needs a weight-non-increasing operator")
        self.n = n
        self.d = d
        self.t = t
        self._cache: dict[tuple[int, int], tuple] = {}
        self._lock = threading.Lock()

    def solved_weights(self) -> list[int]:
        return sorted({w for (_, w) in self._cache})

    def _slice(self, h: int, w: int):
        got = self._cache.get((h, w))
        if got is not None:
            return got
        with self._lock:
            got = self._cache.get((h, w))
            if got is not None:
                return got
            basis = slice_basis(self.n, self.d, h, w)
            index = {k: i for i, k in enumerate(basis)}
            k = len(basis)
            cols = []
            nontrivial = False
            for key in basis:
                img = self.t.fn(SuperPoly(self.n, {key: Scalar(1)}))
                col = [Scalar(0)] * k
                for kk, c in img.terms.items():
                    j = index.get(kk)
                    if j is not None:
                        col[j] = c
                        nontrivial = True
                cols.append(col)
            if not nontrivial:
                entry = (basis, index, None)
            else:
                mat = [
                    [
                        (Scalar(1) if i == j else Scalar(0)) - cols[j][i]
                        for j in range(k)
                    ]
                    for i in range(k)
                ]
                try:
                    inv = invert(mat)
                except SingularMatrix:
                    raise NotGenericAtWeight(w) from None
                entry = (basis, index, inv)
            self._cache[(h, w)] = entry
            return entry

    def apply(self, v: SuperPoly) -> SuperPoly:
        if v.is_zero:
            return v
        n = self.n
        out: dict[Key, Scalar] = {}
        # group the input by degree, then sweep each degree top weight down
        by_h: dict[int, dict[int, dict[Key, Scalar]]] = {}
        for key, c in v.terms.items():
            h = key[1].bit_count()
            w = term_weight(key, self.d)
            by_h.setdefault(h, {}).setdefault(w, {})[key] = c
        for h, pending in by_h.items():
            while pending:
                w = max(pending)
                vec_terms = pending.pop(w)
                basis, index, inv = self._slice(h, w)
                if inv is None:
                    y_terms = vec_terms
                else:
                    rhs = [Scalar(0)] * len(basis)
                    for key, c in vec_terms.items():
                        rhs[index[key]] = c
                    y_terms = {}
                    for i, row in enumerate(inv):
                        acc = Scalar(0)
                        for j, rj in enumerate(rhs):
                            if rj:
                                acc = acc + row[j] * rj
                        if acc:
                            y_terms[basis[i]] = acc
                for key, c in y_terms.items():
                    s = out.get(key)
                    s = c if s is None else s + c
                    if s:
                        out[key] = s
                    else:
                        out.pop(key, None)
                # strictly lower-weight leakage of t feeds the lower slices
                if y_terms:
                    spill = self.t.fn(SuperPoly(n, y_terms))
                    for key, c in spill.terms.items():
                        ww = term_weight(key, self.d)
                        if ww == w:
                            continue
                        bucket = pending.setdefault(ww, {})
                        s = bucket.get(key)
                        s = c if s is None else s + c
                        if s:
                            bucket[key] = s
                        else:
                            bucket.pop(key, None)
                        if not bucket:
                            pending.pop(ww, None)
        return SuperPoly(n, out)


@dataclass
class Retraction:
    """A retraction of a SuperPoly complex onto its degree-0 homology.

    tau maps V to H (realized however the caller likes, e.g. JacClass), phi is
    a section of tau, eta is the degree +1 homotopy on V, and diff is the
    differential of the V side.  d_h is the transferred differential on H,
    which is zero (None) for every retraction this engine constructs; the
    exactness invariant tau o diff = 0 on degree-1 inputs witnesses it.  The
    convention tag records which retraction identity is in force.
    """

    n: int
    d: int
    tau: Callable[[SuperPoly], object]
    phi: Callable[[object], SuperPoly]
    eta: LinearOp
    diff: LinearOp
    d_h: None = None
    convention: str = "B"  # phi o tau - id = diff o eta + eta o diff
    solvers: tuple = ()

    def solved_weights(self) -> list[int]:
        ws: set[int] = set()
        for s in self.solvers:
            ws.update(s.solved_weights())
        return sorted(ws)


def make_inverter(delta: LinearOp, eta: LinearOp, mode: str, n: int, d: int):
    """Return an object with .apply computing (id - delta o eta)^{-1}."""
    t = compose(delta, eta)
    if mode == NILPOTENT:
        if t.weight_change >= 0:
            raise ValueError(
                "nilpotent mode needs delta o eta to strictly drop weight "
                f"(declared change {t.weight_change})"
            )

        class _Neumann:
            def apply(self, v: SuperPoly) -> SuperPoly:
                return neumann_apply(t, v, d)

        return _Neumann()
    if mode == WEIGHT_SOLVE:
        return SliceSolver(n, d, t)
    raise ValueError(f"unknown smallness mode {mode!r}")


def neumann_inverse_apply(delta: LinearOp, eta: LinearOp, v: SuperPoly, mode: str, d: int) -> SuperPoly:
    """(id - delta o eta)^{-1} v under the given smallness mode."""
    return make_inverter(delta, eta, mode, v.n, d).apply(v)


def perturb_retraction(r: Retraction, delta: LinearOp, mode: str) -> Retraction:
    """Transfer the retraction across the small deformation delta of its differential.

    The caller guarantees (diff + delta)^2 = 0.  When H is concentrated in
    degree 0 and V in non-negative degrees, delta o phi lands in degree -1 and
    vanishes, so phi and the zero differential on H carry over unchanged.
    """
    inverter = make_inverter(delta, r.eta, mode, r.n, r.d)
    apply_inv = inverter.apply
    tau0, eta0 = r.tau, r.eta

    new_eta = LinearOp(
        fn=lambda v: eta0.fn(apply_inv(v)),
        degree_shift=1,
        weight_change=eta0.weight_change,
        d=r.d,
        name=f"eta[{delta.name}]",
    )
    solvers = r.solvers + ((inverter,) if isinstance(inverter, SliceSolver) else ())
    return Retraction(
        n=r.n,
        d=r.d,
        tau=lambda v: tau0(apply_inv(v)),
        phi=r.phi,
        eta=new_eta,
        diff=op_sum(r.diff, delta),
        solvers=solvers,
    )
