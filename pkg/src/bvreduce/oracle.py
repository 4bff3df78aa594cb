"""Floating-point validation: contour integrals of f e^s for one variable.

This is the only module allowed to leave exact arithmetic.  It integrates
f(z) e^{s(z)} dz along piecewise-linear contours whose two ends run out along
straight rays into regions where Re(s) is very negative, and checks the
linear relation I(f) = sum_m tau(f)_m I(x^m) predicted by the reduction.

Rays are truncated where Re(s) <= -30, at which point the integrand is below
1e-13 of its scale and the discarded tail is noise; allowability is checked by
sampling Re(s) at and beyond the cutoff.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field

from scipy.integrate import quad

from .bvdiff import Action
from .errors import InputError, NotAllowable, ToleranceNotReached
from .reduce import ReduceSession, session_for
from .superpoly import SuperPoly

RAY_RE_CUTOFF = -30.0
_RAY_SAMPLES = (1.0, 1.25, 1.5, 2.0, 4.0)


@dataclass(frozen=True)
class ContourSpec:
    """A polyline with two outgoing end rays.

    The path runs in from waypoints[0] + ray_length*end_directions[0], through
    the waypoints in order, and back out to waypoints[-1] +
    ray_length*end_directions[1].
    """

    waypoints: tuple[complex, ...]
    end_directions: tuple[complex, complex]
    ray_length: float

    def __post_init__(self):
        if not self.waypoints:
            raise InputError("a contour needs at least one waypoint")
        if self.ray_length <= 0:
            raise InputError("ray length must be positive")
        dirs = []
        for u in self.end_directions:
            r = abs(u)
            if r == 0:
                raise InputError("end directions must be nonzero")
            dirs.append(u / r)
        object.__setattr__(self, "end_directions", (dirs[0], dirs[1]))
        object.__setattr__(self, "waypoints", tuple(complex(w) for w in self.waypoints))

    def with_ray_length(self, r: float) -> "ContourSpec":
        return ContourSpec(self.waypoints, self.end_directions, r)

    def to_json(self) -> dict:
        return {
            "waypoints": [[w.real, w.imag] for w in self.waypoints],
            "end_directions": [[u.real, u.imag] for u in self.end_directions],
            "ray_length": self.ray_length,
        }

    @staticmethod
    def from_json(obj: dict) -> "ContourSpec":
        try:
            wps = tuple(complex(a, b) for a, b in obj["waypoints"])
            dirs = tuple(complex(a, b) for a, b in obj["end_directions"])
            return ContourSpec(wps, (dirs[0], dirs[1]), float(obj["ray_length"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad contour description: {exc}") from exc


@dataclass(frozen=True)
class ComplexEstimate:
    value: complex
    err: float

    def __add__(self, other: "ComplexEstimate") -> "ComplexEstimate":
        return ComplexEstimate(self.value + other.value, self.err + other.err)


def poly1d_coeffs(p: SuperPoly) -> list[complex]:
    """Ascending complex coefficients of a one-variable, degree-0 SuperPoly."""
    if p.n != 1:
        raise InputError("the numeric oracle handles one variable")
    if any(mask for _, mask in p.terms):
        raise InputError("only homological degree 0 can be integrated")
    deg = p.max_xdeg()
    out = [0j] * (deg + 1 if deg >= 0 else 1)
    for (e, _), c in p.terms.items():
        out[e[0]] = c.to_complex()
    return out


def _horner(coeffs: list[complex], z: complex) -> complex:
    acc = 0j
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def _ray_points(c: ContourSpec, which: int):
    base = c.waypoints[0] if which == 0 else c.waypoints[-1]
    return base, c.end_directions[which]


def check_allowable(s_coeffs: list[complex], c: ContourSpec) -> None:
    """Re(s) must be <= -30 at the ray cutoff and stay there beyond it."""
    for which in (0, 1):
        base, u = _ray_points(c, which)
        for t in _RAY_SAMPLES:
            z = base + (t * c.ray_length) * u
            if _horner(s_coeffs, z).real > RAY_RE_CUTOFF:
                raise NotAllowable(
                    f"Re(s) = {_horner(s_coeffs, z).real:.3g} at {t:.3g} ray lengths "
                    f"on end {which}; need <= {RAY_RE_CUTOFF}"
                )


def _quad_piece(g, a: float, b: float, tol: float) -> ComplexEstimate:
    re, re_err = quad(lambda t: g(t).real, a, b, epsabs=tol, epsrel=tol, limit=400)
    im, im_err = quad(lambda t: g(t).imag, a, b, epsabs=tol, epsrel=tol, limit=400)
    return ComplexEstimate(complex(re, im), re_err + im_err)


def _quad_ray(g, length: float, tol: float) -> ComplexEstimate:
    """Integrate g over [0, length] in geometric panels.

    A single adaptive call over a very long ray can converge on near-zero
    samples and miss the mass near the origin; doubling panels keep every
    scale resolved while the decay makes the far panels instantly cheap.
    """
    total = ComplexEstimate(0j, 0.0)
    lo = 0.0
    hi = min(1.0, length)
    while lo < length:
        total = total + _quad_piece(g, lo, hi, tol)
        lo, hi = hi, min(hi * 2.0, length)
    return total


def contour_integrate(
    s: SuperPoly, f: SuperPoly, c: ContourSpec, tol: float = 1e-9
) -> ComplexEstimate:
    """Adaptive quadrature of f e^s along the contour; raises when not certified.

    The returned err is the accumulated quadrature error estimate.  If it
    exceeds tol * max(1, |value|) the result cannot be trusted at the
    requested tolerance and ToleranceNotReached is raised.
    """
    sc = poly1d_coeffs(s)
    fc = poly1d_coeffs(f)
    check_allowable(sc, c)

    def integrand(z: complex) -> complex:
        return _horner(fc, z) * cmath.exp(_horner(sc, z))

    quad_tol = tol * 1e-2
    total = ComplexEstimate(0j, 0.0)

    base, u = _ray_points(c, 0)
    g_in = lambda t: -u * integrand(base + t * u)
    total = total + _quad_ray(g_in, c.ray_length, quad_tol)

    for w0, w1 in zip(c.waypoints, c.waypoints[1:]):
        dz = w1 - w0
        g_seg = lambda t, w0=w0, dz=dz: dz * integrand(w0 + t * dz)
        total = total + _quad_piece(g_seg, 0.0, 1.0, quad_tol)

    base, u = _ray_points(c, 1)
    g_out = lambda t: u * integrand(base + t * u)
    total = total + _quad_ray(g_out, c.ray_length, quad_tol)

    if total.err > tol * max(1.0, abs(total.value)):
        raise ToleranceNotReached(
            f"estimated error {total.err:.3g} exceeds tolerance for value {total.value:.6g}"
        )
    return total


def _fit_ray_length(s_coeffs: list[complex], spec: ContourSpec) -> ContourSpec:
    """Grow the ray length geometrically until the decay check passes with margin."""
    r = max(spec.ray_length, 1.0)
    for _ in range(60):
        candidate = spec.with_ray_length(r)
        try:
            check_allowable(s_coeffs, candidate)
        except NotAllowable:
            r *= 1.5
            continue
        # one extra notch of margin so quadrature tails are safely negligible
        margin = candidate.with_ray_length(1.1 * r)
        try:
            check_allowable(s_coeffs, margin)
            return margin
        except NotAllowable:
            r *= 1.5
    raise NotAllowable("could not find a ray length with Re(s) <= -30 decay")


def default_contours(d: int, s: SuperPoly | None = None, leading: complex = 1.0) -> list[ContourSpec]:
    """d-1 independent contours between consecutive decay sectors of the top term.

    The decay sectors of leading * x^d are centered on the rays where
    Re(leading * x^d) is most negative; contour j runs in from sector j-1 and
    out to sector j through the origin.  When s is supplied its lower-order
    terms are accounted for by fitting the ray length against the full action.
    """
    if d < 2:
        raise InputError("need degree >= 2 for default contours")
    if s is not None:
        sc = poly1d_coeffs(s)
        if len(sc) != d + 1 or sc[d] == 0:
            raise InputError("action degree does not match d")
        leading = sc[d]
    else:
        sc = [0j] * d + [complex(leading)]
    alpha = cmath.phase(leading)
    midlines = [(math.pi * (2 * k + 1) - alpha) / d for k in range(d)]
    out = []
    for j in range(1, d):
        # entering from sector j and leaving through sector j-1 orients the
        # d = 2 contour from -infinity to +infinity (Gaussian integral > 0)
        spec = ContourSpec(
            waypoints=(0j,),
            end_directions=(cmath.exp(1j * midlines[j]), cmath.exp(1j * midlines[j - 1])),
            ray_length=max(2.0, (2 * abs(RAY_RE_CUTOFF) / max(abs(leading), 1e-12)) ** (1.0 / d)),
        )
        out.append(_fit_ray_length(sc, spec))
    return out


@dataclass
class ContourCheck:
    contour: ContourSpec
    value_f: complex
    values_basis: list[complex]
    residual: float
    bound: float
    passed: bool


@dataclass
class ReductionReport:
    coefficients: list
    representatives: list[SuperPoly]
    checks: list[ContourCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def verify_reduction(
    action: Action,
    f: SuperPoly,
    contours: list[ContourSpec] | None = None,
    tol: float = 1e-6,
    session: ReduceSession | None = None,
) -> ReductionReport:
    """Check |I(f) - sum_m tau(f)_m I(phi(m))| <= tol * scale on every contour.

    The representatives phi(m) are the session's section of the basis classes,
    which is plain monomial inclusion for the default session.
    """
    if action.n != 1:
        raise InputError("verify_reduction handles one variable")
    sess = session or session_for(action)
    jc = sess.reduce(f)
    coeffs = jc.vector()
    basis = sess.basis
    reps = []
    for m in basis.monomials:
        unit = type(jc)(basis, {m: 1})
        reps.append(sess.phi(unit))
    if contours is None:
        contours = default_contours(action.d, s=action.s)

    quad_tol = min(1e-9, tol * 1e-3)
    report = ReductionReport(coefficients=coeffs, representatives=reps)
    for c in contours:
        est_f = contour_integrate(action.s, f, c, tol=quad_tol)
        est_basis = [contour_integrate(action.s, rep, c, tol=quad_tol) for rep in reps]
        predicted = sum(
            (coeffs[i].to_complex() * est_basis[i].value for i in range(len(reps))), 0j
        )
        residual = abs(est_f.value - predicted)
        scale = max(abs(est_f.value), max((abs(e.value) for e in est_basis), default=0.0))
        bound = tol * max(scale, 1e-300)
        report.checks.append(
            ContourCheck(
                contour=c,
                value_f=est_f.value,
                values_basis=[e.value for e in est_basis],
                residual=residual,
                bound=bound,
                passed=residual <= bound,
            )
        )
    return report


def load_contours(path: str) -> list[ContourSpec]:
    """Read one contour or a list of contours from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list):
        raise InputError("contour file must hold an object or a list of objects")
    return [ContourSpec.from_json(obj) for obj in data]
