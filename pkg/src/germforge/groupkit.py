"""Group-level machinery for finitely generated jet groups.

Covers the two generator conditions (ordered product is the identity;
generators pairwise conjugate), bounded witness search, closure enumeration,
the degree-slice coefficient morphisms, the affine conjugacy criterion, and
the simultaneous linearization algorithm for groups whose common diagonal
linear part has prime-power eigenvalue orders.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence

from .cyclo import CycloField, CycloNum, is_prime_power, prime_factors, root_of_unity_order
from .jets import (
    DEFAULT_ORDER_BOUND,
    GermJet,
    Matrix,
    MultiIndex,
    OrderResult,
    char_poly,
    compose,
    conjugate,
    germ_order,
    grlex_key,
    invert,
    mat_is_diagonal,
    power,
)
from .resonance import eigenvalue_power, homological_solve, is_resonant

DEFAULT_WITNESS_BOUND = 6
DEFAULT_CLOSURE_CAP = 10_000


class WordError(ValueError):
    """Malformed word or unknown generator name."""


# ---------------------------------------------------------------------------
# presentations and words


@dataclass(frozen=True)
class GroupPresentation:
    """Named jet generators sharing one shape, plus optional witness words."""

    generators: tuple[tuple[str, GermJet], ...]
    witnesses: dict = dc_field(default_factory=dict)  # (i, j) -> word

    def __post_init__(self):
        if not self.generators:
            raise ValueError("presentation needs at least one generator")
        names = [name for name, _ in self.generators]
        if len(set(names)) != len(names):
            raise ValueError("generator names must be distinct")
        shapes = {(j.n, j.K, j.field.conductor) for _, j in self.generators}
        if len(shapes) != 1:
            raise ValueError("generators must share dimension, truncation and field")
        for (i, j), word in self.witnesses.items():
            if not (0 <= i < len(names) and 0 <= j < len(names)):
                raise ValueError(f"witness pair ({i}, {j}) out of range")
            for name, _ in parse_word(word):
                if name not in names:
                    raise WordError(f"witness word uses unknown generator {name!r}")

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.generators]

    @property
    def jets(self) -> list[GermJet]:
        return [j for _, j in self.generators]

    @property
    def field(self) -> CycloField:
        return self.generators[0][1].field

    @property
    def n(self) -> int:
        return self.generators[0][1].n

    @property
    def K(self) -> int:
        return self.generators[0][1].K


_WORD_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z_0-9]*)(?:\s*\^\s*(-?\d+))?\s*")


def parse_word(word: str) -> list[tuple[str, int]]:
    """Parse 'f1^4*f5*f1' into [(name, exponent), ...]; '' is the empty word."""
    if word.strip() == "":
        return []
    out = []
    for chunk in word.split("*"):
        m = _WORD_TOKEN.fullmatch(chunk)
        if not m:
            raise WordError(f"bad word factor {chunk!r}")
        out.append((m.group(1), int(m.group(2)) if m.group(2) else 1))
    return out


def format_word(tokens: Sequence[tuple[str, int]]) -> str:
    merged: list[tuple[str, int]] = []
    for name, e in tokens:
        if merged and merged[-1][0] == name:
            merged[-1] = (name, merged[-1][1] + e)
            if merged[-1][1] == 0:
                merged.pop()
        else:
            merged.append((name, e))
    return "*".join(name if e == 1 else f"{name}^{e}" for name, e in merged)


def evaluate_word(presentation: GroupPresentation, word: str) -> GermJet:
    by_name = dict(presentation.generators)
    out = GermJet.identity(presentation.field, presentation.n, presentation.K)
    for name, e in parse_word(word):
        if name not in by_name:
            raise WordError(f"unknown generator {name!r}")
        out = compose(out, power(by_name[name], e))
    return out


# ---------------------------------------------------------------------------
# condition (a)


def check_product_identity(g: GroupPresentation) -> tuple[bool, GermJet]:
    """Compose generators in listed order; the residual is the composite."""
    jets = g.jets
    out = jets[0]
    for j in jets[1:]:
        out = compose(out, j)
    return out.is_identity(), out


# ---------------------------------------------------------------------------
# bounded BFS over group elements (shared by witness search and closures)


def bfs_ball(identity, letters, depth: int, compose_fn: Callable):
    """Deduplicated (element, word) pairs reachable in <= depth letters.

    Letters are (token, value) pairs explored in list order; FIFO expansion
    yields, per element, the shortest and then lexicographically least word.
    """
    seen = {identity: ()}
    order = [(identity, ())]
    frontier = [(identity, ())]
    for _ in range(depth):
        nxt = []
        for elem, word in frontier:
            for token, value in letters:
                new = compose_fn(elem, value)
                if new not in seen:
                    entry = word + (token,)
                    seen[new] = entry
                    order.append((new, entry))
                    nxt.append((new, entry))
        if not nxt:
            break
        frontier = nxt
    return order


def _distinct_letters(g: GroupPresentation):
    """Generators and inverses, deduplicated by jet value, in listing order."""
    letters = []
    seen = set()
    for name, jet in g.generators:
        for token_exp, value in (((name, 1), jet), ((name, -1), invert(jet))):
            if value not in seen:
                seen.add(value)
                letters.append((token_exp, value))
    return letters


# ---------------------------------------------------------------------------
# condition (b): conjugacy witnesses


@dataclass(frozen=True)
class WitnessResult:
    status: str  # "witness" | "disproved" | "unresolved"
    word: Optional[str] = None
    reason: Optional[str] = None

    @property
    def found(self) -> bool:
        return self.status == "witness"


def _conjugation_prescreen(
    fi: GermJet, fj: GermJet, order_bound: int
) -> Optional[WitnessResult]:
    """Sound non-conjugacy certificates that avoid any search."""
    if fi == fj:
        return WitnessResult("witness", word="")
    oi, oj = germ_order(fi, order_bound), germ_order(fj, order_bound)
    if "inconclusive" not in (oi.kind, oj.kind) and (oi.kind, oi.order) != (oj.kind, oj.order):
        return WitnessResult(
            "disproved",
            reason=f"order-mismatch: {oi.order or oi.kind} vs {oj.order or oj.kind}",
        )
    if char_poly(fi.linear_matrix()) != char_poly(fj.linear_matrix()):
        return WitnessResult("disproved", reason="linear-part-charpoly-mismatch")
    return None


def _generators_commute(g: GroupPresentation) -> bool:
    jets = []
    for _, j in g.generators:
        if j not in jets:
            jets.append(j)
    return all(
        compose(a, b) == compose(b, a) for i, a in enumerate(jets) for b in jets[i + 1 :]
    )


def find_conjugacy_witness(
    g: GroupPresentation,
    i: int,
    j: int,
    bound: int = DEFAULT_WITNESS_BOUND,
    *,
    _ball=None,
    _abelian: Optional[bool] = None,
    order_bound: int = DEFAULT_ORDER_BOUND,
) -> WitnessResult:
    """Witness word w with w o f_j o w^{-1} = f_i, searched to word length `bound`.

    A supplied witness is verified instead of searched.  Pre-screens can
    disprove conjugacy outright (order or characteristic polynomial mismatch;
    commuting generators generate an abelian group, where conjugacy is
    equality); an exhausted search is only ever "unresolved".
    """
    fi, fj = g.jets[i], g.jets[j]
    if i == j:
        return WitnessResult("witness", word="")
    supplied = g.witnesses.get((i, j))
    if supplied is not None:
        w = evaluate_word(g, supplied)
        if compose(w, fj) != compose(fi, w):
            raise ValueError(f"supplied witness {supplied!r} fails for pair ({i}, {j})")
        return WitnessResult("witness", word=supplied)
    screened = _conjugation_prescreen(fi, fj, order_bound)
    if screened is not None:
        return screened
    if _abelian is None:
        _abelian = _generators_commute(g)
    if _abelian:
        return WitnessResult(
            "disproved", reason="commuting-generators: abelian group, conjugacy is equality"
        )
    ball = _ball if _ball is not None else bfs_ball(
        GermJet.identity(g.field, g.n, g.K), _distinct_letters(g), bound, compose
    )
    for elem, word in ball:
        if compose(elem, fj) == compose(fi, elem):
            return WitnessResult(
                "witness", word=format_word(word)
            )
    return WitnessResult("unresolved", reason=f"no witness within word length {bound}")


# ---------------------------------------------------------------------------
# combined report


@dataclass(frozen=True)
class BasicSetReport:
    product_is_identity: bool
    residual: GermJet
    conjugacy: dict  # (i, j), i < j -> WitnessResult
    verdict: str  # "irreducible-verified" | "condition-a-failed" | "condition-b-unresolved"


def check_basic_set(
    g: GroupPresentation,
    bound: int = DEFAULT_WITNESS_BOUND,
    order_bound: int = DEFAULT_ORDER_BOUND,
) -> BasicSetReport:
    prod_ok, residual = check_product_identity(g)
    abelian = _generators_commute(g)
    ball = None
    cache: dict = {}
    conjugacy = {}
    for i in range(len(g.generators)):
        for j in range(i + 1, len(g.generators)):
            key = (g.jets[i], g.jets[j])
            if key in cache:
                conjugacy[(i, j)] = cache[key]
                continue
            if (
                ball is None
                and not abelian
                and (i, j) not in g.witnesses
                and g.jets[i] != g.jets[j]
                and _conjugation_prescreen(g.jets[i], g.jets[j], order_bound) is None
            ):
                ball = bfs_ball(
                    GermJet.identity(g.field, g.n, g.K),
                    _distinct_letters(g),
                    bound,
                    compose,
                )
            res = find_conjugacy_witness(
                g, i, j, bound, _ball=ball, _abelian=abelian, order_bound=order_bound
            )
            cache[key] = res
            conjugacy[(i, j)] = res
    if not prod_ok:
        verdict = "condition-a-failed"
    elif all(r.found for r in conjugacy.values()):
        verdict = "irreducible-verified"
    else:
        verdict = "condition-b-unresolved"
    return BasicSetReport(prod_ok, residual, conjugacy, verdict)


# ---------------------------------------------------------------------------
# closure enumeration and cyclicity


@dataclass(frozen=True)
class ClosureResult:
    status: str  # "closed" | "cap-exceeded"
    elements: Optional[tuple[GermJet, ...]]
    count: int


def closure_enumerate(
    g: GroupPresentation, cap: int = DEFAULT_CLOSURE_CAP, workers: int = 1
) -> ClosureResult:
    """BFS closure of the generated subgroup inside the K-jet group.

    Stops with cap-exceeded as soon as more than `cap` distinct elements have
    been found.  `workers` > 1 expands each frontier with a thread pool;
    deduplication happens on the main thread in frontier order, so the result
    is schedule-independent.
    """
    letters = [value for _, value in _distinct_letters(g)]
    ident = GermJet.identity(g.field, g.n, g.K)
    seen = {ident}
    frontier = [ident]
    while frontier:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                batches = list(
                    pool.map(lambda e: [compose(e, l) for l in letters], frontier)
                )
        else:
            batches = ([compose(e, l) for l in letters] for e in frontier)
        nxt = []
        for batch in batches:
            for candidate in batch:
                if candidate not in seen:
                    seen.add(candidate)
                    nxt.append(candidate)
            if len(seen) > cap:
                return ClosureResult("cap-exceeded", None, len(seen))
        frontier = nxt
    elements = tuple(sorted(seen, key=lambda j: j._canonical_key()))
    return ClosureResult("closed", elements, len(elements))


def is_cyclic(elements: Sequence[GermJet]) -> Optional[GermJet]:
    """A generator whose powers exhaust the set, or None.

    The input must be a finite set closed under composition; the scan order
    is the canonical element order, so the result is deterministic.
    """
    pool = set(elements)
    ordered = sorted(pool, key=lambda j: j._canonical_key())
    for a in ordered:
        for b in ordered:
            if compose(a, b) not in pool:
                raise ValueError("element set is not closed under composition")
    target = len(pool)
    for candidate in ordered:
        seen = set()
        cur = candidate
        while cur not in seen:
            seen.add(cur)
            cur = compose(cur, candidate)
        if len(seen) == target:
            return candidate
    return None


# ---------------------------------------------------------------------------
# degree-slice morphisms into (C, +) and Aff(C)


@dataclass(frozen=True)
class AffineFamily:
    """Maps w -> multiplier * w + translation_i with a finite-order multiplier."""

    multiplier: CycloNum
    translations: tuple[CycloNum, ...]


@dataclass(frozen=True)
class SliceMorphismEntry:
    coord: int
    monomial: MultiIndex
    resonant: bool
    # resonant case: phi_(r,Q)(f) = a_(r,Q)/a_r per generator, an additive character
    phi_values: Optional[tuple[CycloNum, ...]] = None
    additive_on_pairs: Optional[bool] = None
    phi_sum: Optional[CycloNum] = None
    product_forces_zero: Optional[bool] = None
    # nonresonant case: affine images w -> (lambda_r w + a_(r,Q)) / lambda^Q
    family: Optional[AffineFamily] = None
    multiplier_order: Optional[int] = None
    nominal_order: Optional[int] = None
    order_differs_from_nominal: Optional[bool] = None


def slice_morphism_report(g: GroupPresentation, k: int) -> list[SliceMorphismEntry]:
    """Per-(coordinate, monomial) analysis of the degree-k coefficients.

    Requires all generators to share one diagonal linear part and to carry no
    nonlinear terms below degree k.  Resonant monomials yield an additive
    character on the group (checked on generator pairs) whose total along the
    listed product must vanish; nonresonant monomials yield a family of
    affine maps whose multiplier is lambda_r / lambda^Q.
    """
    jets = g.jets
    lin = jets[0].linear_matrix()
    if not mat_is_diagonal(lin):
        raise ValueError("generators must have a diagonal linear part")
    if any(j.linear_matrix() != lin for j in jets):
        raise ValueError("generators must share one linear part")
    for name, j in g.generators:
        low = [key for key in j.coeffs if 1 < sum(key[1]) < k]
        if low:
            raise ValueError(f"generator {name} has nonlinear terms below degree {k}")
    eigenvalues = [lin[i][i] for i in range(g.n)]
    orders = [root_of_unity_order(lam) for lam in eigenvalues]
    nominal = None
    if all(o is not None for o in orders):
        pps = [is_prime_power(o) for o in orders if o > 1]
        primes = {pp[0] for pp in pps if pp}
        if all(pps) and len(primes) == 1:
            nominal = primes.pop() ** sum(pp[1] for pp in pps)
    from .jets import iter_multiindices

    entries = []
    nu_plus_1 = len(jets)
    for s in range(g.n):
        for q in iter_multiindices(g.n, k):
            coeffs = [j.coeff(s, q) for j in jets]
            if is_resonant(eigenvalues, s, q):
                lam_r = eigenvalues[s]
                phi = tuple(c / lam_r for c in coeffs)
                additive = True
                for a in range(len(jets)):
                    for b in range(len(jets)):
                        comp = compose(jets[a], jets[b])
                        lhs = comp.coeff(s, q) / (lam_r * lam_r)
                        if lhs != phi[a] + phi[b]:
                            additive = False
                total = sum(phi[1:], phi[0])
                entries.append(
                    SliceMorphismEntry(
                        coord=s,
                        monomial=q,
                        resonant=True,
                        phi_values=phi,
                        additive_on_pairs=additive,
                        phi_sum=total,
                        product_forces_zero=total.is_zero(),
                    )
                )
            else:
                lam_q = eigenvalue_power(eigenvalues, q)
                eta = eigenvalues[s] / lam_q
                family = AffineFamily(eta, tuple(c / lam_q for c in coeffs))
                eta_order = root_of_unity_order(eta)
                entries.append(
                    SliceMorphismEntry(
                        coord=s,
                        monomial=q,
                        resonant=False,
                        family=family,
                        multiplier_order=eta_order,
                        nominal_order=nominal,
                        order_differs_from_nominal=(
                            None if (eta_order is None or nominal is None) else eta_order != nominal
                        ),
                    )
                )
    return entries


# ---------------------------------------------------------------------------
# affine conjugacy criterion


def affine_conjugacy_decide(family: AffineFamily) -> tuple[bool, str]:
    """Pairwise conjugacy inside the group generated by w -> eta*w + beta_i.

    True iff the multiplier order has two distinct prime divisors, or it is a
    prime power and all translations coincide.
    """
    ell = root_of_unity_order(family.multiplier)
    if ell is None or ell <= 1:
        raise ValueError("multiplier must be a root of unity of order > 1")
    primes = prime_factors(ell)
    if len(primes) >= 2:
        return True, f"multiplier order {ell} has distinct prime divisors {sorted(primes)}"
    first = family.translations[0]
    if all(b == first for b in family.translations[1:]):
        return True, f"multiplier order {ell} is a prime power and all translations are equal"
    return False, f"multiplier order {ell} is a prime power but translations differ"


def affine_conjugacy_bruteforce(family: AffineFamily, word_bound: int = 8) -> bool:
    """Search certificate for the same question, words up to `word_bound`.

    Affine maps are (multiplier, shift) pairs.  Every word of length <= 2d
    factors as u o v with u, v in the radius-d ball, so candidate conjugators
    are enumerated meet-in-the-middle; a pair (h_i, h_j) is conjugate when
    some group element w satisfies w o h_i = h_j o w exactly.
    """
    eta = family.multiplier
    gens = [(eta, b) for b in family.translations]

    def a_compose(u, v):
        return (u[0] * v[0], u[0] * v[1] + u[1])

    def a_invert(u):
        m_inv = u[0].inverse()
        return (m_inv, -(m_inv * u[1]))

    letters = []
    seen_letters = set()
    for h in gens:
        for cand in (h, a_invert(h)):
            if cand not in seen_letters:
                seen_letters.add(cand)
                letters.append((None, cand))
    half = (word_bound + 1) // 2
    ident = (eta.field.one(), eta.field.zero())
    half_ball = [elem for elem, _ in bfs_ball(ident, letters, half, a_compose)]
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            hi, hj = gens[i], gens[j]
            found = False
            for u in half_ball:
                for v in half_ball:
                    w = a_compose(u, v)
                    if a_compose(w, hi) == a_compose(hj, w):
                        found = True
                        break
                if found:
                    break
            if not found:
                return False
    return True


# ---------------------------------------------------------------------------
# simultaneous linearization


@dataclass(frozen=True)
class LinearizationSuccess:
    conjugator: GermJet
    diagonal_generator: Matrix
    group_order: int

    @property
    def ok(self) -> bool:
        return True


@dataclass(frozen=True)
class LinearizationFailure:
    reason: str  # "generators-differ" | "resonant-coefficient-nonzero" | "precondition-violated"
    degree: Optional[int] = None
    offending: tuple = ()
    detail: str = ""
    eigenvalue_orders: Optional[tuple] = None

    @property
    def ok(self) -> bool:
        return False


LinearizationOutcome = LinearizationSuccess | LinearizationFailure


def linearize_group(g: GroupPresentation):
    """Conjugate all generators to their common diagonal linear part at once.

    Preconditions (any violation is a structured failure): the ordered product
    of the generators is the identity, all generators share one diagonal
    linear part, and every eigenvalue is a root of unity whose order is a
    power of one common prime.  The loop then checks per degree that the
    generators carry identical coefficient slices with vanishing resonant
    part, and cancels the shared nonresonant slice through one homological
    step applied to every generator simultaneously.
    """
    jets = list(g.jets)
    names = g.names
    prod_ok, residual = check_product_identity(g)
    if not prod_ok:
        return LinearizationFailure(
            "precondition-violated",
            detail="ordered product of generators is not the identity",
        )
    lin = jets[0].linear_matrix()
    if any(j.linear_matrix() != lin for j in jets):
        return LinearizationFailure(
            "precondition-violated", detail="generators do not share one linear part"
        )
    if not mat_is_diagonal(lin):
        return LinearizationFailure(
            "precondition-violated", detail="common linear part is not diagonal"
        )
    eigenvalues = [lin[i][i] for i in range(g.n)]
    orders = []
    for lam in eigenvalues:
        o = root_of_unity_order(lam)
        if o is None:
            return LinearizationFailure(
                "precondition-violated",
                detail=f"eigenvalue {lam} is not a root of unity",
                eigenvalue_orders=tuple(orders) + (None,),
            )
        orders.append(o)
    primes = set()
    for o in orders:
        if o > 1:
            pp = is_prime_power(o)
            if pp is None:
                return LinearizationFailure(
                    "precondition-violated",
                    detail=f"eigenvalue order {o} is not a prime power",
                    eigenvalue_orders=tuple(orders),
                )
            primes.add(pp[0])
    if len(primes) > 1:
        return LinearizationFailure(
            "precondition-violated",
            detail=(
                "eigenvalue orders "
                + ", ".join(str(o) for o in orders)
                + " are powers of distinct primes "
                + ", ".join(str(p) for p in sorted(primes))
            ),
            eigenvalue_orders=tuple(orders),
        )

    current = jets
    chi = GermJet.identity(g.field, g.n, g.K)
    for k in range(2, g.K + 1):
        slices = [j.degree_slice(k) for j in current]
        keys = sorted(
            {key for sl in slices for key in sl}, key=lambda key: (key[0], grlex_key(key[1]))
        )
        reference = slices[0]
        offending = []
        for idx, sl in enumerate(slices[1:], start=1):
            for key in keys:
                if sl.get(key, g.field.zero()) != reference.get(key, g.field.zero()):
                    offending.append((names[idx], key[0], key[1], sl.get(key, g.field.zero())))
        if offending:
            return LinearizationFailure(
                "generators-differ",
                degree=k,
                offending=tuple(offending),
                detail=f"degree-{k} coefficients differ from generator {names[0]}",
            )
        resonant_bad = tuple(
            (names[0], s, q, c)
            for (s, q), c in sorted(reference.items(), key=lambda kv: (kv[0][0], grlex_key(kv[0][1])))
            if is_resonant(eigenvalues, s, q)
        )
        if resonant_bad:
            return LinearizationFailure(
                "resonant-coefficient-nonzero",
                degree=k,
                offending=resonant_bad,
                detail=f"nonzero resonant coefficients survive at degree {k}",
            )
        if reference:
            p = homological_solve(eigenvalues, reference)
            step = dict(GermJet.identity(g.field, g.n, g.K).coeffs)
            step.update(p)
            h = GermJet(g.n, g.K, g.field, step)
            h_inv = invert(h)
            current = [compose(h_inv, compose(j, h)) for j in current]
            chi = compose(h_inv, chi)
    linear_target = GermJet.from_linear(lin, g.K)
    assert all(j == linear_target for j in current), "linearization left nonlinear residue"
    return LinearizationSuccess(
        conjugator=chi,
        diagonal_generator=lin,
        group_order=math.lcm(*orders),
    )
