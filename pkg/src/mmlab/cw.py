"""Coppersmith-Winograd tensors, border-rank interpolation, and the laser step.

The CW_q tensor lives on a (q+2)-element variable set per axis: a zero
index, q middle indices 1..q, and a top index q+1.  Its border
decomposition uses q+2 rank-one terms whose coefficients are Laurent
polynomials in a parameter lambda; killing the positive lambda-degrees
of the k-th power by exact interpolation over enough points turns the
border identity into an honest weighted sum of rank-(q+2)^k algorithms.

The laser step restricts a large power CW_q^(tensor P) to variables
whose digit-type counts match a prescribed distribution, leaving a set
of matrix-multiplication blocks, and then hashes block types onto a
progression-free set so that greedy pruning yields pairwise disjoint
blocks.
"""

from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass
from fractions import Fraction

from .bilinear import BilinearAlgorithm, CountedMatrix, algorithm_power
from .errors import (
    DimMismatch,
    EvenModulus,
    InfeasibleRounding,
    PreconditionViolated,
    SingularSystem,
    TooLarge,
    TooLargeForExhaustive,
    ZeroPoint,
)
from .fields import (
    ExtensionField,
    Field,
    LaurentPoly,
    PrimeField,
    Rationals,
    roots_of_unity,
)
from .tensors import (
    MatMulShape,
    Tensor,
    digits,
    is_zero_out_of,
    matmul_tensor,
    undigits,
)

# ---------------------------------------------------------------------------
# The CW_q tensor and its border decomposition.


def cw_tensor(q: int, field: Field | None = None) -> Tensor:
    """CW_q on (q+2)^3 indices: 3q+3 entries, all with coefficient one."""
    if q < 1:
        raise ValueError("need q >= 1")
    field = field or Rationals()
    one = field.one
    top = q + 1
    ents = {}
    for i in range(1, q + 1):
        ents[(0, i, i)] = one
        ents[(i, 0, i)] = one
        ents[(i, i, 0)] = one
    ents[(0, 0, top)] = one
    ents[(0, top, 0)] = one
    ents[(top, 0, 0)] = one
    return Tensor(((q + 2),) * 3, field, ents)


@dataclass(frozen=True, eq=False)
class BorderDecomposition:
    """Rank-one terms (u, v, w) with LaurentPoly entries; sparse as dicts.

    degree_d is the largest lambda-degree in the expanded sum, so killing
    degrees 1..degree_d*k recovers the k-th tensor power exactly.
    """

    terms: tuple
    degree_d: int
    q: int
    field: Field

    @property
    def rank(self) -> int:
        return len(self.terms)

    @property
    def dims(self) -> tuple[int, int, int]:
        return ((self.q + 2),) * 3


def _expand_terms(field: Field, terms) -> dict[int, dict[tuple[int, int, int], object]]:
    """Lambda-degree -> sparse tensor of the expanded sum of rank-one terms."""
    acc: dict[int, dict[tuple[int, int, int], object]] = {}
    for u, v, w in terms:
        for i, pu in u.items():
            for j, pv in v.items():
                prod_uv = pu * pv
                for k, pw in w.items():
                    prod = prod_uv * pw
                    for e, cf in prod.coeffs.items():
                        bucket = acc.setdefault(e, {})
                        key = (i, j, k)
                        bucket[key] = field.add(bucket.get(key, field.zero), cf)
    for e in list(acc):
        acc[e] = {idx: c for idx, c in acc[e].items() if not field.is_zero(c)}
        if not acc[e]:
            del acc[e]
    return acc


def cw_border_decomp(q: int, field: Field | None = None) -> BorderDecomposition:
    """q+2 rank-one terms whose lambda-expansion is CW_q + O(lambda)."""
    if q < 1:
        raise ValueError("need q >= 1")
    field = field or Rationals()
    one = field.one
    top = q + 1
    lam = lambda e, c=None: LaurentPoly.lam(field, e, c)
    const_one = LaurentPoly.const(field, one)
    terms = []

    # Middle terms: lambda^-2 (x0 + lambda x_i)(y0 + lambda y_i)(z0 + lambda z_i),
    # prefactor folded into u.
    for i in range(1, q + 1):
        u = {0: lam(-2), i: lam(-1)}
        v = {0: const_one, i: lam(1)}
        w = {0: const_one, i: lam(1)}
        terms.append((u, v, w))

    # Correction term: -lambda^-3 (x0 + lambda^2 sum_i x_i)(... y ...)(... z ...).
    neg_one = field.neg(one)
    u = {0: lam(-3, neg_one)}
    u.update({i: lam(-1, neg_one) for i in range(1, q + 1)})
    v = {0: const_one}
    v.update({i: lam(2) for i in range(1, q + 1)})
    w = {0: const_one}
    w.update({i: lam(2) for i in range(1, q + 1)})
    terms.append((u, v, w))

    # Top term: (lambda^-3 - q lambda^-2)(x0 + lambda^3 x_top)(...)(...).
    pref = LaurentPoly(field, {-3: one, -2: field.neg(field.of_int(q))})
    u = {0: pref, top: LaurentPoly(field, {0: one, 1: field.neg(field.of_int(q))})}
    v = {0: const_one, top: lam(3)}
    w = {0: const_one, top: lam(3)}
    terms.append((u, v, w))

    expansion = _expand_terms(field, terms)
    return BorderDecomposition(
        terms=tuple(terms), degree_d=max(expansion), q=q, field=field)


def border_expansion(decomp: BorderDecomposition) -> dict[int, Tensor]:
    """Lambda-degree -> tensor coefficient of the expanded decomposition."""
    raw = _expand_terms(decomp.field, decomp.terms)
    return {e: Tensor(decomp.dims, decomp.field, ents) for e, ents in raw.items()}


def verify_border(decomp: BorderDecomposition, t: Tensor) -> bool:
    """True iff the expansion has no negative degrees and degree 0 equals t."""
    if decomp.dims != t.dims or decomp.field != t.field:
        return False
    expansion = border_expansion(decomp)
    if any(e < 0 for e in expansion):
        return False
    zero_part = expansion.get(0)
    return zero_part is not None and zero_part == t


def specialize(decomp: BorderDecomposition, lam0) -> BilinearAlgorithm:
    """Evaluate every term at lambda = lam0 != 0; rank stays q+2."""
    field = decomp.field
    if field.is_zero(lam0):
        raise ZeroPoint("specialization point must be nonzero")
    rank = decomp.rank
    dim = decomp.q + 2
    ex, ey, dz = {}, {}, {}
    for ell, (u, v, w) in enumerate(decomp.terms):
        for i, p in u.items():
            val = p.eval_at(lam0)
            if not field.is_zero(val):
                ex[(ell, i)] = val
        for j, p in v.items():
            val = p.eval_at(lam0)
            if not field.is_zero(val):
                ey[(ell, j)] = val
        for k, p in w.items():
            val = p.eval_at(lam0)
            if not field.is_zero(val):
                dz[(k, ell)] = val
    return BilinearAlgorithm(
        CountedMatrix(rank, dim, field, ex),
        CountedMatrix(rank, dim, field, ey),
        CountedMatrix(dim, rank, field, dz),
    )


# ---------------------------------------------------------------------------
# Border rank to rank: exact interpolation.


def interpolation_weights(points, d_max: int, field: Field | None = None) -> list:
    """Weights w with sum_i w_i == 1 and sum_i w_i p_i^e == 0 for 1 <= e <= d_max.

    Solves the (d_max+1)-point Vandermonde system exactly over the first
    d_max+1 points; extra points are ignored.
    """
    field = field or Rationals()
    if d_max < 0:
        raise ValueError("need d_max >= 0")
    if len(points) < d_max + 1:
        raise SingularSystem(f"need {d_max + 1} points, got {len(points)}")
    n = d_max + 1
    pts = list(points[:n])
    # Augmented rows [p_0^e .. p_{n-1}^e | rhs_e] with rhs = (1, 0, .., 0).
    rows = []
    for e in range(n):
        row = [field.pow(p, e) for p in pts]
        row.append(field.one if e == 0 else field.zero)
        rows.append(row)
    for col in range(n):
        pivot = next(
            (r for r in range(col, n) if not field.is_zero(rows[r][col])), None)
        if pivot is None:
            raise SingularSystem("interpolation points are not pairwise distinct")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        inv = field.inv(rows[col][col])
        rows[col] = [field.mul(inv, x) for x in rows[col]]
        for r in range(n):
            if r != col and not field.is_zero(rows[r][col]):
                factor = rows[r][col]
                rows[r] = [
                    field.sub(x, field.mul(factor, y))
                    for x, y in zip(rows[r], rows[col])
                ]
    return [rows[r][n] for r in range(n)]


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _enough_points(field: Field, count: int) -> tuple[Field, list]:
    """count pairwise-distinct nonzero points, extending the field if needed."""
    if isinstance(field, Rationals):
        return field, [Fraction(i) for i in range(1, count + 1)]
    if field.order - 1 < count:
        char = field.char
        deg = 1 if isinstance(field, PrimeField) else field.deg
        step = deg
        while char**deg - 1 < count:
            deg += step
        field = ExtensionField(char, deg)
    points = []
    for a in field.elements():
        if not field.is_zero(a):
            points.append(a)
            if len(points) == count:
                break
    return field, points


def rank_terms_from_border(decomp: BorderDecomposition, k: int,
                           field: Field | None = None,
                           mode: str = "points"):
    """Weighted rank-(q+2)^k algorithms summing exactly to cw_tensor(q)^(tensor k).

    mode "points" interpolates over d*k+1 nonzero points (consecutive
    integers over the rationals, enumerated elements over a finite field,
    extending the field when it is too small).  mode "roots" uses the
    p-th roots of unity for the smallest prime p > d*k with uniform
    weights 1/p; over the rationals it falls back to the point solve.
    Returns (list of (weight, algorithm), number of points used).
    """
    if k < 1:
        raise ValueError("need k >= 1")
    field = field or decomp.field
    d_max = decomp.degree_d * k
    if mode == "points":
        field, points = _enough_points(field, d_max + 1)
        weights = interpolation_weights(points, d_max, field)
    elif mode == "roots":
        p = d_max + 1
        while not _is_prime(p):
            p += 1
        field, points = roots_of_unity(p, field)
        if isinstance(field, Rationals):
            # 1..p are not roots of unity; solve the point system instead.
            weights = interpolation_weights(points, d_max, field)
            points = points[: d_max + 1]
        else:
            inv_p = field.inv(field.of_int(p))
            weights = [inv_p] * p
    else:
        raise ValueError(f"unknown interpolation mode {mode!r}")
    if field != decomp.field:
        decomp = cw_border_decomp(decomp.q, field)
    weighted = [
        (w, algorithm_power(specialize(decomp, pt), k))
        for w, pt in zip(weights, points)
    ]
    return weighted, len(points)


def weighted_tensor_sum(weighted) -> Tensor:
    """Sum of weight * computed tensor over (weight, algorithm) pairs."""
    acc = None
    for w, algo in weighted:
        t = algo.computed_tensor().scale(w)
        acc = t if acc is None else acc.add(t)
    if acc is None:
        raise ValueError("no algorithms given")
    return acc


# ---------------------------------------------------------------------------
# Salem-Spencer sets.


def is_ap_free_mod(elements, m: int) -> bool:
    """No x, y, z in the set with x + y = 2z (mod m) besides x = y = z."""
    eset = set(elements)
    inv2 = pow(2, -1, m) if m % 2 else None
    for x in eset:
        for y in eset:
            s = (x + y) % m
            if inv2 is not None:
                cands = ((s * inv2) % m,)
            elif s % 2 == 0:
                cands = (s // 2, s // 2 + m // 2)
            else:
                cands = ()
            for z in cands:
                if z in eset and not (x == y == z):
                    return False
    return True


@dataclass(frozen=True)
class SalemSpencerSet:
    """Progression-free residues mod an explicit modulus."""

    modulus: int
    elements: tuple[int, ...]

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("need modulus >= 1")
        object.__setattr__(self, "elements", tuple(sorted(set(self.elements))))
        if any(not 0 <= e < self.modulus for e in self.elements):
            raise ValueError("elements must be residues mod the modulus")
        if not is_ap_free_mod(self.elements, self.modulus):
            raise ValueError("set contains a three-term progression")

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, r) -> bool:
        return r in self.elements


_EXHAUSTIVE_CUTOFF = 30


def _compatible(cur, cur_set, e, m):
    # Would adding e create a progression?  e can sit in any of the three slots.
    for x in cur:
        if (2 * e - x) % m in cur_set:
            return False
        y = (2 * x - e) % m
        if y in cur_set or y == e:
            return False
        s = (x + e) % m
        if m % 2:
            if (s * pow(2, -1, m)) % m in cur_set:
                return False
        elif s % 2 == 0 and (s // 2 in cur_set or (s // 2 + m // 2) in cur_set):
            return False
    return True


def _max_ap_free(m: int) -> list[int]:
    best: list[int] = []

    def extend(cur, cur_set, start):
        nonlocal best
        if len(cur) > len(best):
            best = list(cur)
        for e in range(start, m):
            if len(cur) + (m - e) <= len(best):
                break
            if _compatible(cur, cur_set, e, m):
                cur.append(e)
                cur_set.add(e)
                extend(cur, cur_set, e + 1)
                cur.pop()
                cur_set.discard(e)

    extend([], set(), 0)
    return best


def _behrend_elements(bound: int) -> list[int]:
    """Integer progression-free subset of {0..bound}, digit-sphere style.

    Digits below d in base 2d add without carries, so x + y = 2z forces a
    per-digit identity; fixing the digit-square sum puts the digit vectors
    on a sphere, whose strict convexity kills nontrivial progressions.
    """
    best = list(range(min(bound + 1, 2)))
    d = 2
    while (2 * d) ** 1 <= bound + 1:
        n = 1
        while (2 * d) ** n <= bound + 1:
            if d**n <= 200_000:
                by_r: dict[int, list[int]] = {}
                for tup in _digit_tuples(d, n):
                    r = sum(a * a for a in tup)
                    val = sum(a * (2 * d) ** i for i, a in enumerate(tup))
                    by_r.setdefault(r, []).append(val)
                cand = max(by_r.values(), key=len)
                if len(cand) > len(best):
                    best = cand
            n += 1
        d += 1
    return sorted(best)


def _digit_tuples(d: int, n: int):
    tup = [0] * n

    def rec(pos):
        if pos == n:
            yield tuple(tup)
            return
        for a in range(d):
            tup[pos] = a
            yield from rec(pos + 1)

    yield from rec(0)


def salem_spencer(m: int, method: str = "exhaustive") -> SalemSpencerSet:
    """Progression-free set mod m; exhaustive maximizes, behrend scales.

    The behrend construction stays inside {0..(m-1)//2}, where x + y and
    2z cannot wrap mod m, so integer progression-freeness is enough.
    """
    if m < 1:
        raise ValueError("need m >= 1")
    if m == 1:
        return SalemSpencerSet(1, (0,))
    if method == "exhaustive":
        if m > _EXHAUSTIVE_CUTOFF:
            raise TooLargeForExhaustive(
                f"exhaustive search capped at m <= {_EXHAUSTIVE_CUTOFF}")
        return SalemSpencerSet(m, tuple(_max_ap_free(m)))
    if method == "behrend":
        return SalemSpencerSet(m, tuple(_behrend_elements((m - 1) // 2)))
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Type distributions and their counting identities.


def multinomial(total: int, parts) -> int:
    parts = tuple(parts)
    if any(p < 0 for p in parts) or sum(parts) != total:
        raise ValueError(f"parts {parts} do not sum to {total}")
    out, rest = 1, total
    for p in parts:
        out *= math.comb(rest, p)
        rest -= p
    return out


@dataclass(frozen=True)
class TypeDistribution:
    """Coordinate-type budgets for restricting CW_q^(tensor p).

    The p coordinates split into six classes: three paired-digit classes
    of sizes a*n, b*n, c*n (exponents a, b, c are exact rationals, n is
    the scaling integer) and three corner classes l1, l2, l3.  The class
    sizes must be nonnegative integers summing to p.
    """

    a: Fraction
    b: Fraction
    c: Fraction
    n: int
    l1: int
    l2: int
    l3: int
    p: int
    q: int

    def __post_init__(self):
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.q < 1 or self.n < 1:
            raise ValueError("need q >= 1 and n >= 1")
        if min(self.l1, self.l2, self.l3) < 0:
            raise ValueError("corner budgets must be nonnegative")
        if min(self.a, self.b, self.c) <= 0:
            raise ValueError("exponents must be positive")
        for name in ("a", "b", "c"):
            if (getattr(self, name) * self.n).denominator != 1:
                raise ValueError(f"{name}*n must be an integer")
        if self.an + self.bn + self.cn + self.l1 + self.l2 + self.l3 != self.p:
            raise ValueError("class sizes must sum to p")

    @property
    def an(self) -> int:
        return int(self.a * self.n)

    @property
    def bn(self) -> int:
        return int(self.b * self.n)

    @property
    def cn(self) -> int:
        return int(self.c * self.n)

    @property
    def block_shape(self) -> MatMulShape:
        return MatMulShape(self.q**self.an, self.q**self.bn, self.q**self.cn)

    # Per-axis counts of type-0, type-1, type-2 coordinates.
    @property
    def x_type_counts(self) -> tuple[int, int, int]:
        return (self.cn + self.l1 + self.l2, self.an + self.bn, self.l3)

    @property
    def y_type_counts(self) -> tuple[int, int, int]:
        return (self.an + self.l1 + self.l3, self.bn + self.cn, self.l2)

    @property
    def z_type_counts(self) -> tuple[int, int, int]:
        return (self.bn + self.l2 + self.l3, self.an + self.cn, self.l1)


def block_count(dist: TypeDistribution) -> int:
    """Number of surviving (X, Y, Z) triple blocks after the restriction."""
    return multinomial(
        dist.p, (dist.l1, dist.l2, dist.l3, dist.an, dist.bn, dist.cn))


def sharing_counts(dist: TypeDistribution) -> dict[str, int]:
    """How many completing pairs share one fixed block on each axis."""
    an, bn, cn = dist.an, dist.bn, dist.cn
    l1, l2, l3 = dist.l1, dist.l2, dist.l3
    return {
        "per_x": multinomial(an + bn, (an, bn)) * multinomial(cn + l1 + l2, (cn, l1, l2)),
        "per_y": multinomial(bn + cn, (bn, cn)) * multinomial(an + l1 + l3, (an, l1, l3)),
        "per_z": multinomial(an + cn, (an, cn)) * multinomial(bn + l2 + l3, (bn, l2, l3)),
    }


def pchoose_check(p: int, q: int, alpha: int) -> bool:
    """Exact check of q^(q*alpha) * multinomial(p; q*alpha, alpha, alpha) >= (q+2)^p / p^2."""
    if q < 1 or alpha < 1:
        raise PreconditionViolated("need q >= 1 and alpha >= 1")
    if p != (q + 2) * alpha:
        raise PreconditionViolated(f"p must equal (q+2)*alpha, got {p}")
    lhs = q ** (q * alpha) * multinomial(p, (q * alpha, alpha, alpha))
    return lhs * p * p >= (q + 2) ** p


# ---------------------------------------------------------------------------
# Parameter selection for the rectangular flight.


def josh_flight_exact(delta, k: int, p: int | None = None) -> dict[str, Fraction]:
    """Pre-rounding parameter chain for exponents (a, b, c) = (1, 1+delta, k).

    With alpha = p/(q+2) (alpha = 1 when p is omitted) the class sizes
    are n = (1 - delta/2) alpha, l1 = l3 = delta alpha / 4, l2 = alpha,
    and the total (a+b+c) n + l1 + l2 + l3 lands exactly on p.
    """
    delta = Fraction(delta)
    if k < 1:
        raise ValueError("need k >= 1")
    a, b, c = Fraction(1), 1 + delta, Fraction(k)
    q = (b + c) * (1 - delta / 2)
    alpha = Fraction(1) if p is None else Fraction(p) / (q + 2)
    return {
        "a": a,
        "b": b,
        "c": c,
        "q": q,
        "alpha": alpha,
        "n": (1 - delta / 2) * alpha,
        "l1": delta * alpha / 4,
        "l2": alpha,
        "l3": delta * alpha / 4,
        "p": (q + 2) * alpha,
    }


def josh_flight_params(delta, k: int, p: int) -> TypeDistribution:
    """Round the exact flight parameters to an integral TypeDistribution.

    Every derived quantity is floored and the slack is absorbed into l2,
    which the dominance comparison constrains least; b is nudged to
    bn/n so the stored exponents reproduce the integer class sizes.
    """
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise InfeasibleRounding(f"delta {delta} outside (0, 1)")
    if delta >= Fraction(1, 2):
        warnings.warn(
            "delta >= 1/2: the sharing dominance argument needs delta < 1/2",
            UserWarning, stacklevel=2)
    exact = josh_flight_exact(delta, k, p)
    q = math.floor(exact["q"])
    n = math.floor(exact["n"])
    l1 = l3 = math.floor(exact["l1"])
    if q < 1 or n < 1:
        raise InfeasibleRounding(f"p={p} too small: q={q}, n={n} after flooring")
    an = n
    bn = math.floor((1 + delta) * n)
    cn = k * n
    l2 = p - (an + bn + cn + l1 + l3)
    if l2 < 0:
        raise InfeasibleRounding(f"class sizes exceed p={p}")
    return TypeDistribution(
        a=Fraction(1), b=Fraction(bn, n), c=Fraction(k),
        n=n, l1=l1, l2=l2, l3=l3, p=p, q=q)


# ---------------------------------------------------------------------------
# Laser restriction of CW_q^(tensor p) to a type distribution.

# Per-coordinate (x, y, z) digit types.  Type 1 coordinates carry a shared
# middle digit (1..q); type 2 is the top index q+1; type 0 is index 0.
_TYPE_PATTERNS = (
    (0, 1, 1),  # shared y/z digit, budget c*n
    (1, 0, 1),  # shared x/z digit, budget a*n
    (1, 1, 0),  # shared x/y digit, budget b*n
    (0, 0, 2),  # budget l1
    (0, 2, 0),  # budget l2
    (2, 0, 0),  # budget l3
)

_MATERIALIZE_CUTOFF = 500_000


@dataclass(frozen=True)
class LaserBlock:
    """One matmul block of the restricted power, with explicit bijections.

    x_vars[i*m + j], y_vars[j*d + k], z_vars[k*n + i] give the global
    variable indices realizing the block as the matmul tensor of shape.
    """

    assignment: tuple[int, ...]
    x_vars: tuple[int, ...]
    y_vars: tuple[int, ...]
    z_vars: tuple[int, ...]
    shape: MatMulShape

    @property
    def i_vec(self) -> tuple[int, ...]:
        return tuple(_TYPE_PATTERNS[t][0] for t in self.assignment)

    @property
    def j_vec(self) -> tuple[int, ...]:
        return tuple(_TYPE_PATTERNS[t][1] for t in self.assignment)

    @property
    def k_vec(self) -> tuple[int, ...]:
        return tuple(_TYPE_PATTERNS[t][2] for t in self.assignment)


def _assignments(budgets, length: int):
    """All arrangements of the six coordinate types with the given counts."""
    out = [0] * length
    remaining = list(budgets)

    def rec(pos):
        if pos == length:
            yield tuple(out)
            return
        for sym in range(len(remaining)):
            if remaining[sym]:
                out[pos] = sym
                remaining[sym] -= 1
                yield from rec(pos + 1)
                remaining[sym] += 1

    yield from rec(0)


def _block_from_assignment(q: int, assignment, an: int, bn: int, cn: int) -> LaserBlock:
    base = q + 2
    pos_c = [j for j, t in enumerate(assignment) if t == 0]
    pos_a = [j for j, t in enumerate(assignment) if t == 1]
    pos_b = [j for j, t in enumerate(assignment) if t == 2]
    shape = MatMulShape(q**an, q**bn, q**cn)

    def var(pairs, top_type):
        vec = [0] * len(assignment)
        for j, t in enumerate(assignment):
            if _TYPE_PATTERNS[t] == top_type:
                vec[j] = q + 1
        for positions, ds in pairs:
            for pos, dg in zip(positions, ds):
                vec[pos] = dg + 1
        return undigits(vec, base)

    x_vars, y_vars, z_vars = [], [], []
    i_digits = [digits(i, q, an) for i in range(shape.n)]
    j_digits = [digits(j, q, bn) for j in range(shape.m)]
    k_digits = [digits(k, q, cn) for k in range(shape.d)]
    for i in range(shape.n):
        for j in range(shape.m):
            x_vars.append(var([(pos_a, i_digits[i]), (pos_b, j_digits[j])], (2, 0, 0)))
    for j in range(shape.m):
        for k in range(shape.d):
            y_vars.append(var([(pos_b, j_digits[j]), (pos_c, k_digits[k])], (0, 2, 0)))
    for k in range(shape.d):
        for i in range(shape.n):
            z_vars.append(var([(pos_c, k_digits[k]), (pos_a, i_digits[i])], (0, 0, 2)))
    return LaserBlock(
        assignment=tuple(assignment),
        x_vars=tuple(x_vars), y_vars=tuple(y_vars), z_vars=tuple(z_vars),
        shape=shape)


def _budgets(dist: TypeDistribution) -> tuple[int, ...]:
    return (dist.cn, dist.an, dist.bn, dist.l1, dist.l2, dist.l3)


def enumerate_blocks(q: int, dist: TypeDistribution) -> list[LaserBlock]:
    """Every surviving triple block of the restriction, in assignment order."""
    if q != dist.q:
        raise DimMismatch(f"q={q} disagrees with dist.q={dist.q}")
    return [
        _block_from_assignment(q, asg, dist.an, dist.bn, dist.cn)
        for asg in _assignments(_budgets(dist), dist.p)
    ]


def laser_zero_out(q: int, dist: TypeDistribution, field: Field | None = None) -> Tensor:
    """CW_q^(tensor p) restricted to variables with the prescribed type counts.

    Built block by block rather than by materializing the full power.
    Axis labels map each surviving variable index to its per-coordinate
    type vector, which is all later hashing needs.
    """
    if q != dist.q:
        raise DimMismatch(f"q={q} disagrees with dist.q={dist.q}")
    field = field or Rationals()
    n_blocks = block_count(dist)
    per_block = q ** (dist.an + dist.bn + dist.cn)
    if n_blocks * per_block > _MATERIALIZE_CUTOFF:
        raise TooLarge(
            f"{n_blocks} blocks x {per_block} entries exceeds the "
            f"materialization cutoff {_MATERIALIZE_CUTOFF}")
    one = field.one
    ents = {}
    xl: dict[int, tuple[int, ...]] = {}
    yl: dict[int, tuple[int, ...]] = {}
    zl: dict[int, tuple[int, ...]] = {}
    for blk in enumerate_blocks(q, dist):
        sh = blk.shape
        iv, jv, kv = blk.i_vec, blk.j_vec, blk.k_vec
        for x in blk.x_vars:
            xl[x] = iv
        for y in blk.y_vars:
            yl[y] = jv
        for z in blk.z_vars:
            zl[z] = kv
        for i in range(sh.n):
            for j in range(sh.m):
                xv = blk.x_vars[sh.a_index(i, j)]
                for k in range(sh.d):
                    key = (xv, blk.y_vars[sh.b_index(j, k)], blk.z_vars[sh.c_index(k, i)])
                    ents[key] = one
    dims = ((q + 2) ** dist.p,) * 3
    return Tensor(dims, field, ents, axis_labels=(xl, yl, zl))


# ---------------------------------------------------------------------------
# Hashing the blocks onto a progression-free set.


@dataclass(frozen=True)
class LaserOutput:
    """Pairwise variable-disjoint matmul blocks surviving the hash step."""

    blocks: tuple[LaserBlock, ...]
    weights: tuple[int, ...]
    modulus: int
    log: dict

    @property
    def h(self) -> int:
        return len(self.blocks)

    def witness(self) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
        """Block-major concatenated variable lists, for direct-sum checks."""
        xs = tuple(v for blk in self.blocks for v in blk.x_vars)
        ys = tuple(v for blk in self.blocks for v in blk.y_vars)
        zs = tuple(v for blk in self.blocks for v in blk.z_vars)
        return xs, ys, zs


# K digit type implied by per-coordinate (I_j, J_j); None marks invalid pairs.
_K_FROM_IJ = {
    (pat[0], pat[1]): pat[2] for pat in _TYPE_PATTERNS
}


def _compose_k(i_vec, j_vec):
    ks = []
    for ii, jj in zip(i_vec, j_vec):
        kk = _K_FROM_IJ.get((ii, jj))
        if kk is None:
            return None
        ks.append(kk)
    return tuple(ks)


def _recover_budgets(zeroed: Tensor) -> tuple[int, int, tuple[int, ...]]:
    """(q, p, six class budgets) from the restriction's type metadata."""
    if zeroed.axis_labels is None:
        raise DimMismatch("tensor lacks laser type metadata")
    from .engines import integer_root

    xl, yl, zl = zeroed.axis_labels
    i0 = next(iter(xl.values()))
    j0 = next(iter(yl.values()))
    k0 = next(iter(zl.values()))
    p = len(i0)
    q = integer_root(zeroed.dims[0], p) - 2
    l3, ab = sum(t == 2 for t in i0), sum(t == 1 for t in i0)
    l2, bc = sum(t == 2 for t in j0), sum(t == 1 for t in j0)
    l1, ac = sum(t == 2 for t in k0), sum(t == 1 for t in k0)
    an2, bn2, cn2 = ab + ac - bc, ab + bc - ac, bc + ac - ab
    if min(an2, bn2, cn2) < 0 or an2 % 2 or bn2 % 2 or cn2 % 2:
        raise DimMismatch("inconsistent type metadata")
    return q, p, (cn2 // 2, an2 // 2, bn2 // 2, l1, l2, l3)


def laser_hash_degenerate(zeroed: Tensor, sset: SalemSpencerSet,
                          weights=None, seed=None) -> LaserOutput:
    """Hash block types onto the progression-free set, prune to disjoint blocks.

    Types hash as h_X = w0 + sum_j w_j I_j and h_Y likewise; h_Z solves
    2 h_Z = 2 w0 + sum_j w_j (2 - K_j), so surviving triples (whose types
    sum to 2 per coordinate) satisfy h_X + h_Y = 2 h_Z and the
    progression-free target forces h_X = h_Y = h_Z.  Greedy pruning in
    hash order keeps a block iff it shares no variable with earlier
    kept blocks; a final sweep drops blocks whose leftover cross terms
    would survive the variable restriction, so the kept blocks form an
    exact direct summand.
    """
    m = sset.modulus
    if m % 2 == 0:
        raise EvenModulus("hashing needs an odd modulus")
    q, p, budgets = _recover_budgets(zeroed)
    if weights is None:
        rng = random.Random(seed)
        weights = [rng.randrange(m) for _ in range(p + 1)]
    else:
        weights = [int(w) % m for w in weights]
        if len(weights) != p + 1:
            raise DimMismatch(f"need {p + 1} hash weights, got {len(weights)}")
    cn, an, bn = budgets[0], budgets[1], budgets[2]
    blocks = [
        _block_from_assignment(q, asg, an, bn, cn)
        for asg in _assignments(budgets, p)
    ]
    inv2 = pow(2, -1, m)
    w0, wrest = weights[0], weights[1:]

    def hash_vec(vec):
        return (w0 + sum(w * t for w, t in zip(wrest, vec))) % m

    def hash_z(vec):
        return ((2 * w0 + sum(w * (2 - t) for w, t in zip(wrest, vec))) * inv2) % m

    in_b = set(sset.elements)
    survivors = []
    for blk in blocks:
        hx, hy, hz = hash_vec(blk.i_vec), hash_vec(blk.j_vec), hash_z(blk.k_vec)
        assert (hx + hy - 2 * hz) % m == 0
        if hx in in_b and hy in in_b and hz in in_b:
            if not hx == hy == hz:
                raise ValueError("progression-free target failed to align hashes")
            survivors.append((hx, blk))
    survivors.sort(key=lambda pair: (pair[0], pair[1].assignment))

    # Variable disjointness is exactly type-vector distinctness: a variable
    # determines its own type vector, so equal vectors share all variables
    # and distinct vectors share none.
    kept: list[LaserBlock] = []
    ri: set[tuple[int, ...]] = set()
    rj: set[tuple[int, ...]] = set()
    rk: set[tuple[int, ...]] = set()
    for _, blk in survivors:
        if blk.i_vec in ri or blk.j_vec in rj or blk.k_vec in rk:
            continue
        kept.append(blk)
        ri.add(blk.i_vec)
        rj.add(blk.j_vec)
        rk.add(blk.k_vec)

    # Cross-term sweep: an (I of one kept block, J of another) pair can
    # assemble a third valid block whose variables all survive the
    # restriction; drop the I-side owner until no such pair remains.
    stray_dropped = 0
    while True:
        kept_pairs = {(blk.i_vec, blk.j_vec) for blk in kept}
        stray_owner = None
        for blk_a in kept:
            for blk_b in kept:
                if blk_a is blk_b:
                    continue
                kv = _compose_k(blk_a.i_vec, blk_b.j_vec)
                if kv is None or kv not in rk:
                    continue
                if (blk_a.i_vec, blk_b.j_vec) not in kept_pairs:
                    stray_owner = blk_a
                    break
            if stray_owner is not None:
                break
        if stray_owner is None:
            break
        kept.remove(stray_owner)
        ri.discard(stray_owner.i_vec)
        rj.discard(stray_owner.j_vec)
        rk.discard(stray_owner.k_vec)
        stray_dropped += 1

    for blk in kept:
        sub = matmul_tensor(blk.shape, zeroed.field)
        if not is_zero_out_of(sub, zeroed, (blk.x_vars, blk.y_vars, blk.z_vars),
                              ordered=True):
            raise ValueError("retained block failed its matmul verification")

    log = {
        "blocks_total": len(blocks),
        "hash_kept": len(survivors),
        "greedy_kept": len(kept) + stray_dropped,
        "stray_dropped": stray_dropped,
    }
    return LaserOutput(
        blocks=tuple(kept), weights=tuple(weights), modulus=m, log=log)
