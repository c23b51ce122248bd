"""Exact projective automorphisms of P^1 over a cyclotomic field.

Maps are 2x2 matrices up to scale, stored with the first nonzero entry in
row-major order scaled to 1 so projective equality is plain comparison.
Orders are decided exactly through the eigenvalue-ratio trace recurrence;
fixed points are eigenvector computations whose square roots are found by
verified reconstruction or reported as requiring a field extension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import mpmath

from .cyclo import (
    CycloField,
    CycloNum,
    FieldMismatchError,
    euler_phi,
    is_prime_power,
    root_of_unity_order,
)
from .jets import GermJet, OrderResult
from .groupkit import (
    GroupPresentation,
    LinearizationSuccess,
    bfs_ball,
    linearize_group,
)


class ExtensionRequiredError(ArithmeticError):
    """The answer lives in a quadratic extension of the working field."""


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProjectivePoint:
    """Point [u : v] of P^1; canonical form is (z, 1) for affine z, (1, 0) for infinity."""

    u: CycloNum
    v: CycloNum

    @staticmethod
    def make(u: CycloNum, v: CycloNum) -> "ProjectivePoint":
        if v.is_zero():
            if u.is_zero():
                raise ValueError("[0 : 0] is not a projective point")
            return ProjectivePoint(u.field.one(), u.field.zero())
        return ProjectivePoint(u / v, v.field.one())

    @staticmethod
    def infinity(fld: CycloField) -> "ProjectivePoint":
        return ProjectivePoint(fld.one(), fld.zero())

    @staticmethod
    def affine(z: CycloNum) -> "ProjectivePoint":
        return ProjectivePoint(z, z.field.one())

    @property
    def is_infinity(self) -> bool:
        return self.v.is_zero()

    def sort_key(self):
        return (1 if self.is_infinity else 0, self.u.coeffs, self.v.coeffs)

    def __repr__(self) -> str:
        return "Point(inf)" if self.is_infinity else f"Point({self.u})"


class MoebiusMap:
    """z -> (a z + b) / (c z + d) as the matrix [[a, b], [c, d]], det != 0."""

    __slots__ = ("matrix", "field")

    def __init__(self, matrix: Sequence[Sequence[CycloNum]]):
        (a, b), (c, d) = matrix
        fld = a.field
        scale = next((x for x in (a, b, c, d) if not x.is_zero()), None)
        if scale is None:
            raise ValueError("zero matrix is not a Moebius map")
        inv = scale.inverse()
        a, b, c, d = a * inv, b * inv, c * inv, d * inv
        if (a * d - b * c).is_zero():
            raise ValueError("matrix determinant is zero")
        self.matrix = ((a, b), (c, d))
        self.field = fld

    @classmethod
    def scaling(cls, xi: CycloNum) -> "MoebiusMap":
        one, zero = xi.field.one(), xi.field.zero()
        return cls(((xi, zero), (zero, one)))

    @classmethod
    def inversion(cls, fld: CycloField) -> "MoebiusMap":
        one, zero = fld.one(), fld.zero()
        return cls(((zero, one), (one, zero)))

    @classmethod
    def identity(cls, fld: CycloField) -> "MoebiusMap":
        one, zero = fld.one(), fld.zero()
        return cls(((one, zero), (zero, one)))

    def is_identity(self) -> bool:
        (a, b), (c, d) = self.matrix
        return b.is_zero() and c.is_zero() and a == d

    def entries(self):
        (a, b), (c, d) = self.matrix
        return a, b, c, d

    def det(self) -> CycloNum:
        a, b, c, d = self.entries()
        return a * d - b * c

    def trace(self) -> CycloNum:
        a, _, _, d = self.entries()
        return a + d

    def inverse(self) -> "MoebiusMap":
        a, b, c, d = self.entries()
        return MoebiusMap(((d, -b), (-c, a)))

    def apply(self, p: ProjectivePoint) -> ProjectivePoint:
        a, b, c, d = self.entries()
        return ProjectivePoint.make(a * p.u + b * p.v, c * p.u + d * p.v)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MoebiusMap):
            return NotImplemented
        return self.field.conductor == other.field.conductor and self.matrix == other.matrix

    def __hash__(self) -> int:
        return hash((self.field.conductor, tuple(c.coeffs for row in self.matrix for c in row)))

    def __repr__(self) -> str:
        a, b, c, d = self.entries()
        return f"MoebiusMap([[{a}, {b}], [{c}, {d}]])"


def moebius_compose(m1: MoebiusMap, m2: MoebiusMap) -> MoebiusMap:
    if m1.field.conductor != m2.field.conductor:
        raise FieldMismatchError("Moebius maps from different fields")
    (a, b), (c, d) = m1.matrix
    (e, f), (g, h) = m2.matrix
    return MoebiusMap(((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h)))


# ---------------------------------------------------------------------------
# projective order


def _torsion_order_bound(fld: CycloField) -> int:
    """Largest k such that a primitive k-th root can satisfy [Q(zeta_k):Q] <= 2*phi(N).

    The eigenvalue ratio lives in at most a quadratic extension of the field,
    so its order k obeys phi(k) <= 2*phi(N); phi(k) >= sqrt(k/2) caps the scan.
    """
    budget = 2 * fld.degree
    limit = 2 * (budget + 1) ** 2
    return max(k for k in range(1, limit + 1) if euler_phi(k) <= budget)


def moebius_order(m: MoebiusMap, bound: int = 0) -> OrderResult:
    """Projective order: least k with m^k a scalar matrix; exact.

    With ratio r = mu1/mu2 of the eigenvalues, w_m = r^m + r^-m satisfies the
    recurrence w_{m+1} = w_1 * w_m - w_{m-1} inside the field, and m^k is
    scalar iff w_k = 2.  Scanning k up to the field's torsion bound (or
    `bound` if larger) decides finiteness outright.
    """
    if m.is_identity():
        return OrderResult("finite", order=1)
    t = m.trace()
    d = m.det()
    w1 = (t * t) / d - 2
    two = m.field.from_rational(2)
    if w1 == two:
        return OrderResult(
            "infinite",
            certificate="parabolic: equal eigenvalues on a non-scalar matrix",
        )
    limit = max(_torsion_order_bound(m.field), bound)
    w_prev, w_cur = two, w1
    for k in range(1, limit + 1):
        if w_cur == two:
            return OrderResult("finite", order=k)
        w_prev, w_cur = w_cur, w1 * w_cur - w_prev
    return OrderResult(
        "infinite",
        certificate=(
            f"eigenvalue ratio is not a root of unity (no order within torsion bound {limit})"
        ),
    )


# ---------------------------------------------------------------------------
# exact square roots by verified reconstruction


def _fraction_from_mpf(x, max_den: int = 10**24) -> Optional[Fraction]:
    """Best rational approximation by continued fractions, None when unstable."""
    num0, den0 = 0, 1
    num1, den1 = 1, 0
    rem = mpmath.mpf(x)
    for _ in range(200):
        a = int(mpmath.floor(rem))
        num0, num1 = num1, a * num1 + num0
        den0, den1 = den1, a * den1 + den0
        if den1 > max_den:
            return None
        frac = rem - a
        approx = Fraction(num1, den1)
        if abs(mpmath.mpf(approx.numerator) / approx.denominator - mpmath.mpf(x)) < mpmath.mpf(10) ** (-(mpmath.mp.dps - 12)):
            return approx
        if frac == 0:
            return approx
        rem = 1 / frac
    return None


def cyclo_sqrt(a: CycloNum, digits: int = 60) -> Optional[CycloNum]:
    """A square root of `a` in its own field, or None when none is found.

    Rational perfect squares are handled exactly; otherwise a candidate is
    reconstructed from the numeric embeddings (one sign choice per embedding)
    and verified by exact squaring, so a returned value is always correct.
    """
    fld = a.field
    if a.is_zero():
        return fld.zero()
    q = a.as_rational()
    if q is not None:
        num, den = q.numerator, q.denominator
        if q > 0:
            rn, rd = math.isqrt(num), math.isqrt(den)
            if rn * rn == num and rd * rd == den:
                return fld.from_rational(Fraction(rn, rd))
        else:
            rn, rd = math.isqrt(-num), math.isqrt(den)
            if rn * rn == -num and rd * rd == den and fld.conductor % 4 == 0:
                return fld.zeta(fld.conductor // 4) * Fraction(rn, rd)
    n, deg = fld.conductor, fld.degree
    units = [k for k in range(1, n + 1) if math.gcd(k, n) == 1]
    with mpmath.workdps(digits):
        zetas = [mpmath.expjpi(mpmath.mpf(2 * k % (2 * n)) / n) for k in range(n)]
        emb_matrix = mpmath.matrix(
            [[zetas[(u * i) % n] for i in range(deg)] for u in units]
        )
        values = []
        for u in units:
            total = mpmath.mpc(0)
            for i, c in enumerate(a.coeffs):
                if c:
                    total += zetas[(u * i) % n] * mpmath.mpf(c.numerator) / c.denominator
            values.append(total)
        roots = [mpmath.sqrt(v) for v in values]
        for mask in range(1 << (deg - 1)):
            rhs = mpmath.matrix(
                [
                    roots[j] if (j == 0 or not (mask >> (j - 1)) & 1) else -roots[j]
                    for j in range(deg)
                ]
            )
            try:
                sol = mpmath.lu_solve(emb_matrix, rhs)
            except ZeroDivisionError:
                return None
            coeffs = []
            for i in range(deg):
                if abs(mpmath.im(sol[i])) > mpmath.mpf(10) ** (-(digits // 2)):
                    coeffs = None
                    break
                frac = _fraction_from_mpf(mpmath.re(sol[i]))
                if frac is None:
                    coeffs = None
                    break
                coeffs.append(frac)
            if coeffs is None:
                continue
            candidate = fld.element(coeffs)
            if candidate * candidate == a:
                return candidate
    return None


def fixed_points(m: MoebiusMap) -> list[ProjectivePoint]:
    """Fixed points, i.e. the eigendirections of the matrix; 1 or 2 of them.

    Raises ExtensionRequiredError when the eigenvalues need a quadratic
    extension; the caller can embed into a larger conductor and retry.
    """
    if m.is_identity():
        raise ValueError("the identity fixes every point")
    a, b, c, d = m.entries()
    t = m.trace()
    disc = (a - d) * (a - d) + b * c * 4
    half = Fraction(1, 2)

    def eigenvector(mu: CycloNum) -> ProjectivePoint:
        if not b.is_zero():
            return ProjectivePoint.make(b, mu - a)
        if not c.is_zero():
            return ProjectivePoint.make(mu - d, c)
        # diagonal with distinct entries
        return ProjectivePoint.infinity(m.field) if mu == a else ProjectivePoint.make(
            m.field.zero(), m.field.one()
        )

    if disc.is_zero():
        return [eigenvector(t * half)]
    s = cyclo_sqrt(disc)
    if s is None:
        raise ExtensionRequiredError(
            f"fixed points require a square root of {disc} outside Q(zeta_{m.field.conductor})"
        )
    mu1 = (t + s) * half
    mu2 = (t - s) * half
    pts = [eigenvector(mu1), eigenvector(mu2)]
    pts.sort(key=lambda p: p.sort_key())
    return pts


def germ_at_fixed_point(m: MoebiusMap, q: ProjectivePoint, order: int) -> GermJet:
    """K-jet at 0 of m in the local chart w = z - q (or w = 1/z at infinity).

    The local expression is A*w / (1 + B*w), so the jet coefficients form the
    geometric sequence A * (-B)**(k-1); A is the multiplier of m at q.
    """
    if m.apply(q) != q:
        raise ValueError("the given point is not fixed by the map")
    a, b, c, d = m.entries()
    if q.is_infinity:
        lead, ratio = d / a, b / a
    else:
        gamma = c * q.u + d
        lead, ratio = (a - q.u * c) / gamma, c / gamma
    coeffs = {}
    cur = lead
    for k in range(1, order + 1):
        if not cur.is_zero():
            coeffs[(0, (k,))] = cur
        cur = cur * (-ratio)
    return GermJet(1, order, m.field, coeffs)


# ---------------------------------------------------------------------------
# holonomy verdict


@dataclass(frozen=True)
class HolonomyVerdict:
    finite_cyclic: bool
    order: Optional[int] = None
    model: Optional[str] = None  # "rotation" | "inversion" | "other"
    first_integral_exponent: Optional[int] = None
    detail: str = ""
    certificate: Optional[str] = None


def _moebius_letters(generators: Sequence[MoebiusMap]):
    letters = []
    seen = set()
    for idx, g in enumerate(generators):
        for tag, val in (((f"g{idx+1}", 1), g), ((f"g{idx+1}", -1), g.inverse())):
            if val not in seen:
                seen.add(val)
                letters.append((tag, val))
    return letters


def holonomy_check(
    generators: Sequence[MoebiusMap],
    expected_count: int,
    word_bound: int = 6,
    order: int = 3,
    closure_cap: int = 4096,
) -> HolonomyVerdict:
    """Decide whether the generated Moebius group is finite cyclic.

    The generator list must have prime-power length (the ramification-degree
    hypothesis).  The generators must satisfy the two basic-set conditions in
    the Moebius group; a common fixed point is then localized to a
    1-dimensional jet presentation which is linearized simultaneously.  The
    closure of the Moebius group itself is enumerated as an independent
    finiteness certificate and both routes are reported.
    """
    gens = list(generators)
    if len(gens) != expected_count:
        raise ValueError("generator count does not match the declared count")
    if is_prime_power(expected_count) is None and expected_count != 1:
        raise ValueError(f"expected_count {expected_count} is not a prime power")
    fld = gens[0].field
    if any(g.field.conductor != fld.conductor for g in gens):
        raise FieldMismatchError("generators from different fields")

    distinct = []
    for g in gens:
        if g not in distinct:
            distinct.append(g)

    orders = [moebius_order(g) for g in distinct]
    for g, o in zip(distinct, orders):
        if o.kind != "finite":
            return HolonomyVerdict(
                False,
                model="other",
                detail=f"generator {g!r} has infinite projective order",
                certificate=o.certificate,
            )

    # condition (a)
    prod = gens[0]
    for g in gens[1:]:
        prod = moebius_compose(prod, g)
    if not prod.is_identity():
        return HolonomyVerdict(
            False, model="other", detail="ordered product of generators is not the identity"
        )
    # condition (b): exact witness search in the Moebius group
    if len(distinct) > 1:
        ball = bfs_ball(
            MoebiusMap.identity(fld), _moebius_letters(gens), word_bound, moebius_compose
        )
        for i in range(len(distinct)):
            for j in range(i + 1, len(distinct)):
                if not any(
                    moebius_compose(e, distinct[j]) == moebius_compose(distinct[i], e)
                    for e, _ in ball
                ):
                    return HolonomyVerdict(
                        False,
                        model="other",
                        detail=(
                            f"no conjugacy witness within word length {word_bound} "
                            f"for generator pair ({i}, {j})"
                        ),
                    )

    nontrivial = [g for g in distinct if not g.is_identity()]
    if not nontrivial:
        return HolonomyVerdict(
            True, order=1, model="rotation", first_integral_exponent=1,
            detail="all generators are the identity",
        )
    common: Optional[list[ProjectivePoint]] = None
    for g in nontrivial:
        pts = fixed_points(g)
        common = pts if common is None else [p for p in common if p in pts]
    if not common:
        return HolonomyVerdict(
            False, model="other", detail="generators have no common fixed point"
        )
    q = sorted(common, key=lambda p: p.sort_key())[0]

    germs = [(f"g{i+1}", germ_at_fixed_point(g, q, order)) for i, g in enumerate(gens)]
    outcome = linearize_group(GroupPresentation(tuple(germs)))
    if not isinstance(outcome, LinearizationSuccess):
        return HolonomyVerdict(
            False,
            model="other",
            detail=f"local germs at the fixed point do not linearize: {outcome.detail}",
        )
    k = outcome.group_order

    # independent route: closure of the Moebius group itself
    seen = {MoebiusMap.identity(fld)}
    frontier = list(seen)
    letters = [v for _, v in _moebius_letters(gens)]
    while frontier and len(seen) <= closure_cap:
        nxt = []
        for e in frontier:
            for l in letters:
                cand = moebius_compose(e, l)
                if cand not in seen:
                    seen.add(cand)
                    nxt.append(cand)
        frontier = nxt
    closure_note = (
        f"moebius closure has {len(seen)} elements"
        if len(seen) <= closure_cap
        else f"moebius closure exceeded cap {closure_cap}"
    )

    if (
        len(distinct) == 1
        and moebius_order(distinct[0]).order == 2
        and len(fixed_points(distinct[0])) == 2
    ):
        return HolonomyVerdict(
            True, order=2, model="inversion",
            detail=f"single order-2 generator with two fixed points; {closure_note}",
        )
    return HolonomyVerdict(
        True,
        order=k,
        model="rotation",
        first_integral_exponent=k,
        detail=f"local multipliers generate a cyclic group of order {k}; {closure_note}",
    )
