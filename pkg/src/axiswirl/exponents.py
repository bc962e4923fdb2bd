"""Exponent algebra for the energy bootstrap, in exact rational arithmetic.

Everything here works with :class:`fractions.Fraction`; floats only appear
when a report is serialized.  The relevant quantities for a mixed norm
``L_{s,l} = L_l(L_s)`` in three space dimensions are

* the scaling power ``kappa = l (3/s + 2/l - 1)``,
* the interpolation exponents ``m = 2 l (3/s + 2/l - 3/2)`` and
  ``mu = (l/m)(3/s + 3/l - 2)``,
* the Hoelder weights ``alpha1, alpha2, alpha3`` that split ``L_3`` between
  ``L_{2,inf}``, ``L_{6,2}`` and ``L_{s,l}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

__all__ = [
    "ExponentError",
    "MixedNormSpec",
    "ExponentReport",
    "CertificateTrace",
    "ScanPoint",
    "ScanResult",
    "as_fraction",
    "mixed_norm_spec",
    "exponent_report",
    "holder_weights",
    "solve_holder_system",
    "is_feasible",
    "is_admissible",
    "scan_feasible_region",
    "certificate_iteration",
    "quarter_parameters",
    "heuristic_bootstrap_check",
    "PUBLISHED_CONSTANTS",
]

# (m, mu) as printed for the two norm choices used to close the energy bound.
PUBLISHED_CONSTANTS = {
    (Fraction(7, 4), Fraction(10)): (Fraction(58, 7), Fraction(1, 58)),
    (Fraction(4), Fraction(12, 7)): (Fraction(10, 7), Fraction(3, 14)),
}

TWO_THIRDS = Fraction(2, 3)
ONE_THIRD = Fraction(1, 3)


class ExponentError(ValueError):
    """Raised for out-of-range or degenerate exponent requests."""


def as_fraction(value) -> Fraction:
    """Convert ints, Fractions, decimal strings or ``"a/b"`` strings exactly.

    Floats are accepted only when they are exactly representable as short
    decimals (``1.9`` -> ``19/10``); ``limit_denominator`` is not used.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ExponentError(f"non-finite exponent {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ExponentError(f"cannot parse exponent {value!r}") from exc
    raise ExponentError(f"unsupported exponent type {type(value).__name__}")


@dataclass(frozen=True)
class MixedNormSpec:
    s: Fraction
    l: Fraction
    kappa: Fraction

    def as_floats(self) -> tuple[float, float, float]:
        return float(self.s), float(self.l), float(self.kappa)

    def label(self) -> str:
        return f"{self.s}:{self.l}"


def mixed_norm_spec(s, l) -> MixedNormSpec:
    s, l = as_fraction(s), as_fraction(l)
    if s < 1 or l < 1:
        raise ExponentError(f"mixed norm needs s >= 1 and l >= 1, got s={s}, l={l}")
    return MixedNormSpec(s, l, l * (3 / s + 2 / l - 1))


def _gap(s: Fraction, l: Fraction) -> Fraction:
    return 3 / s + 2 / l - Fraction(3, 2)


def is_admissible(s, l) -> bool:
    """Range condition under which the C <= A^mu M^(1/m) (E+H)^((m-1)/m) bound holds."""
    s, l = as_fraction(s), as_fraction(l)
    return _gap(s, l) >= max(Fraction(1, 2) - 1 / s, 1 / s - Fraction(1, 6))


def is_feasible(x, y) -> bool:
    """Point test for the bootstrap triangle in ``(x, y) = (1/s, 1/l)``."""
    x, y = as_fraction(x), as_fraction(y)
    return x + y >= TWO_THIRDS and 2 * x + y >= 1 and 3 * x + 2 * y < 2


def holder_weights(s, l) -> tuple[Fraction, Fraction, Fraction]:
    """Closed-form solution of the three-equation Hoelder system for n = 3."""
    s, l = as_fraction(s), as_fraction(l)
    d = _gap(s, l)
    if d == 0:
        raise ExponentError(f"degenerate exponents: 3/s + 2/l = 3/2 at s={s}, l={l}")
    a1 = (1 / s + 1 / l - TWO_THIRDS) / d
    a2 = (2 / s + 1 / l - 1) / d
    a3 = 1 / (6 * d)
    return a1, a2, a3


def solve_holder_system(s, l, n: int = 3) -> tuple[Fraction, ...]:
    """Solve the Hoelder system by exact Gaussian elimination.

    Rows: ``a1 + a2 + a3 = 1``, ``a1/2 + a2/2* + a3/s = 1/3``,
    ``a2/2 + a3/l = 1/3`` with ``1/2* = 1/2 - 1/n``.  Kept independent of
    :func:`holder_weights` so that each can check the other.
    """
    s, l = as_fraction(s), as_fraction(l)
    if n < 3:
        raise ExponentError("Sobolev exponent 2* is finite only for n >= 3")
    inv_star = Fraction(1, 2) - Fraction(1, n)
    rows = [
        [Fraction(1), Fraction(1), Fraction(1), Fraction(1)],
        [Fraction(1, 2), inv_star, 1 / s, ONE_THIRD],
        [Fraction(0), Fraction(1, 2), 1 / l, ONE_THIRD],
    ]
    for col in range(3):
        pivot = next((r for r in range(col, 3) if rows[r][col] != 0), None)
        if pivot is None:
            raise ExponentError(f"singular Hoelder system at s={s}, l={l}")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        p = rows[col][col]
        rows[col] = [v / p for v in rows[col]]
        for r in range(3):
            if r != col and rows[r][col] != 0:
                factor = rows[r][col]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[col])]
    return tuple(row[3] for row in rows)


@dataclass(frozen=True)
class ExponentReport:
    spec: MixedNormSpec
    m: Fraction
    mu: Fraction | None
    alpha1: Fraction
    alpha2: Fraction
    alpha3: Fraction
    admissible_as3: bool
    feasible_e7: bool
    published_m: Fraction | None = None
    published_mu: Fraction | None = None
    notes: tuple[str, ...] = ()

    @property
    def mu_discrepancy(self) -> bool:
        return self.published_mu is not None and self.mu != self.published_mu

    def to_dict(self) -> dict:
        def frac(v):
            return None if v is None else {"exact": str(v), "value": float(v)}

        return {
            "s": frac(self.spec.s),
            "l": frac(self.spec.l),
            "kappa": frac(self.spec.kappa),
            "m": frac(self.m),
            "mu": frac(self.mu),
            "alpha": [frac(self.alpha1), frac(self.alpha2), frac(self.alpha3)],
            "admissible_as3": self.admissible_as3,
            "feasible_e7": self.feasible_e7,
            "published_m": frac(self.published_m),
            "published_mu": frac(self.published_mu),
            "mu_discrepancy": self.mu_discrepancy,
            "notes": list(self.notes),
        }


def exponent_report(s, l) -> ExponentReport:
    spec = mixed_norm_spec(s, l)
    s, l = spec.s, spec.l
    a1, a2, a3 = holder_weights(s, l)
    m = 2 * l * _gap(s, l)
    mu = (l / m) * (3 / s + 3 / l - 2)
    published_m, published_mu = PUBLISHED_CONSTANTS.get((s, l), (None, None))
    notes = []
    if published_m is not None and published_m != m:
        notes.append(f"m from formula {m} differs from printed value {published_m}")
    if published_mu is not None and published_mu != mu:
        notes.append(f"mu from formula {mu} differs from printed value {published_mu}")
    return ExponentReport(
        spec=spec,
        m=m,
        mu=mu,
        alpha1=a1,
        alpha2=a2,
        alpha3=a3,
        admissible_as3=is_admissible(s, l),
        feasible_e7=is_feasible(1 / s, 1 / l),
        published_m=published_m,
        published_mu=published_mu,
        notes=tuple(notes),
    )


def heuristic_bootstrap_check(alphas: Sequence, s=None, l=None) -> bool:
    """True when the energy exponent ``alpha1 + alpha2`` stays below 2/3.

    ``s`` and ``l`` are accepted for symmetry with :func:`exponent_report`;
    when given, they must reproduce ``alphas``.
    """
    a1, a2, a3 = (as_fraction(a) for a in alphas)
    if a1 + a2 + a3 != 1:
        raise ExponentError("Hoelder weights must sum to 1")
    if s is not None and l is not None and holder_weights(s, l) != (a1, a2, a3):
        raise ExponentError(f"weights do not belong to s={s}, l={l}")
    return a1 + a2 < TWO_THIRDS


@dataclass(frozen=True)
class ScanPoint:
    x: Fraction
    y: Fraction
    feasible: bool
    alphas: tuple[Fraction, Fraction, Fraction] | None  # None on the degenerate line

    @property
    def s(self) -> Fraction:
        return 1 / self.x

    @property
    def l(self) -> Fraction:
        return 1 / self.y


@dataclass
class ScanResult:
    resolution: int
    points: list[ScanPoint] = field(default_factory=list)

    @property
    def feasible_points(self) -> list[ScanPoint]:
        return [p for p in self.points if p.feasible]

    @property
    def has_l_below_two(self) -> bool:
        return any(p.y > Fraction(1, 2) and p.x < 1 for p in self.feasible_points)

    def rows(self) -> Iterable[tuple]:
        for p in self.points:
            a = p.alphas if p.alphas is not None else (None, None, None)
            yield (p.x, p.y, p.feasible, *a)


def scan_feasible_region(resolution: int) -> ScanResult:
    """Rasterize ``(x, y) = (i/n, j/n)``, ``1 <= i, j <= n``.

    Rows are ordered with ``x`` outer, ``y`` inner.
    """
    if resolution < 8:
        raise ExponentError("scan resolution must be at least 8")
    out = ScanResult(resolution)
    for i in range(1, resolution + 1):
        x = Fraction(i, resolution)
        for j in range(1, resolution + 1):
            y = Fraction(j, resolution)
            try:
                alphas = holder_weights(1 / x, 1 / y)
            except ExponentError:
                alphas = None
            out.points.append(ScanPoint(x, y, is_feasible(x, y), alphas))
    return out


@dataclass(frozen=True)
class CertificateTrace:
    theta: float
    epsilon: float
    contraction: float
    additive: float
    sequence: tuple[float, ...]
    bounded: bool
    bound: float | None  # None when the recursion does not contract

    @property
    def bound_defined(self) -> bool:
        return self.bound is not None


def quarter_parameters(c: float) -> tuple[float, float]:
    """Pick ``(theta, eps)`` with ``c*theta < 1/4`` and ``c*eps/theta**2 < 1/4``."""
    if not c > 0:
        raise ExponentError("constant c must be positive")
    theta = min(0.5, 1.0 / (5.0 * c))
    eps = theta * theta / (5.0 * c)
    return theta, eps


def certificate_iteration(E0: float, contraction_inputs, additive: float, steps: int) -> CertificateTrace:
    """Iterate ``x_{k+1} = c (theta + eps/theta^2) x_k + additive``.

    ``contraction_inputs`` is ``(c, theta, eps)``.
    """
    c, theta, eps = (float(v) for v in contraction_inputs)
    if E0 < 0 or additive < 0 or c < 0 or eps < 0:
        raise ExponentError("certificate inputs must be nonnegative")
    if theta <= 0:
        raise ExponentError("theta must be positive")
    if steps < 1:
        raise ExponentError("need at least one iteration step")
    q = c * (theta + eps / theta**2)
    seq = [float(E0)]
    for _ in range(steps):
        seq.append(q * seq[-1] + additive)
    bounded = q < 1
    bound = additive / (1.0 - q) if bounded else None
    return CertificateTrace(theta, eps, q, float(additive), tuple(seq), bounded, bound)
