"""Exact scalar domains: rationals, prime fields, and extension fields.

Every other module receives a Field object and stores raw element values
(Fraction for the rationals, int for F_p, coefficient tuple for F_{p^e}).
Element values are kept canonical so `==` is exact equality.

Laurent polynomials in the border-rank indeterminate live here too; the
indeterminate is written `lam` in code and λ in docs (the variable some
sources call ε is the same object).
"""

from __future__ import annotations

from fractions import Fraction

from .errors import DivisionByZero, DomainMismatch, NoSuchRoot


class Field:
    """Interface shared by the concrete scalar domains."""

    descriptor: str = "?"

    @property
    def zero(self):
        raise NotImplementedError

    @property
    def one(self):
        raise NotImplementedError

    def of_int(self, n: int):
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, e: int):
        if e < 0:
            return self.pow(self.inv(a), -e)
        acc, base = self.one, a
        while e:
            if e & 1:
                acc = self.mul(acc, base)
            base = self.mul(base, base)
            e >>= 1
        return acc

    def is_zero(self, a) -> bool:
        return a == self.zero

    def is_pm_one(self, a) -> bool:
        """True for 1 and -1: multiplication by these costs nothing."""
        return a == self.one or a == self.neg(self.one)

    def show(self, a) -> str:
        raise NotImplementedError

    def parse(self, s: str):
        raise NotImplementedError

    def random(self, rng):
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, Field) and self.descriptor == other.descriptor

    def __hash__(self):
        return hash(self.descriptor)

    def __repr__(self):
        return f"{type(self).__name__}({self.descriptor!r})"

    def check_same(self, other: "Field"):
        if self != other:
            raise DomainMismatch(f"{self.descriptor} vs {other.descriptor}")


class Rationals(Field):
    """Arbitrary-precision rationals; elements are Fraction in lowest terms."""

    descriptor = "rational"

    @property
    def zero(self):
        return Fraction(0)

    @property
    def one(self):
        return Fraction(1)

    def of_int(self, n):
        return Fraction(n)

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        if a == 0:
            raise DivisionByZero("1/0 over the rationals")
        return 1 / a

    def is_pm_one(self, a):
        return a == 1 or a == -1

    def show(self, a):
        return str(a)

    def parse(self, s):
        return Fraction(s.strip())

    def random(self, rng):
        # Small integers keep intermediate values readable in traces.
        return Fraction(rng.randint(-9, 9))


class PrimeField(Field):
    """F_p for prime p; elements are ints in [0, p)."""

    def __init__(self, p: int):
        if p < 2 or any(p % d == 0 for d in range(2, int(p**0.5) + 1)):
            raise ValueError(f"modulus {p} is not prime")
        self.p = p
        self.descriptor = f"fp:{p}"

    @property
    def zero(self):
        return 0

    @property
    def one(self):
        return 1

    @property
    def order(self):
        return self.p

    @property
    def char(self):
        return self.p

    def of_int(self, n):
        return n % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise DivisionByZero(f"1/0 in F_{self.p}")
        return pow(a, self.p - 2, self.p)

    def is_pm_one(self, a):
        return a == 1 or a == self.p - 1

    def show(self, a):
        return f"{a} mod {self.p}"

    def parse(self, s):
        s = s.strip()
        if "mod" in s:
            val, mod = s.split("mod")
            if int(mod) != self.p:
                raise DomainMismatch(f"scalar {s!r} is not mod {self.p}")
            s = val
        return int(s) % self.p

    def random(self, rng):
        return rng.randrange(self.p)

    def elements(self):
        return range(self.p)


def _poly_trim(c: list[int]) -> tuple[int, ...]:
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _poly_mulmod(a, b, modulus, p):
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _poly_divmod(out, modulus, p)[1]


def _poly_divmod(a, b, p):
    a = list(a)
    db, lb = len(b) - 1, b[-1]
    inv_lb = pow(lb, p - 2, p)
    q = [0] * max(len(a) - db, 0)
    while len(a) - 1 >= db and any(a):
        da = len(a) - 1
        if a[-1] == 0:
            a.pop()
            continue
        coef = a[-1] * inv_lb % p
        q[da - db] = coef
        for i, bi in enumerate(b):
            a[da - db + i] = (a[da - db + i] - coef * bi) % p
        a.pop()
    return _poly_trim(q), _poly_trim(a)


def _poly_is_irreducible(f, p):
    """Trial factorization: no monic divisor of degree 1..deg(f)//2."""
    deg = len(f) - 1

    def monics(d):
        # All monic degree-d polynomials over F_p, low coefficients first.
        count = p**d
        for idx in range(count):
            coeffs, v = [], idx
            for _ in range(d):
                coeffs.append(v % p)
                v //= p
            yield tuple(coeffs + [1])

    for d in range(1, deg // 2 + 1):
        for g in monics(d):
            if not _poly_divmod(f, g, p)[1]:
                return False
    return True


def poly_str(coeffs: tuple[int, ...]) -> str:
    """Human form of a coefficient tuple, low degree first: (1,0,1) -> x^2+1."""
    terms = []
    for e in range(len(coeffs) - 1, -1, -1):
        c = coeffs[e]
        if c == 0:
            continue
        if e == 0:
            terms.append(str(c))
        elif e == 1:
            terms.append("x" if c == 1 else f"{c}x")
        else:
            terms.append(f"x^{e}" if c == 1 else f"{c}x^{e}")
    return "+".join(terms) if terms else "0"


class ExtensionField(Field):
    """F_{p^deg} as F_p[x]/(modulus); elements are coefficient tuples.

    The modulus is the lexicographically first monic irreducible of the
    requested degree (constant coefficient varies fastest), found by trial
    factorization at construction time, so (p, deg) pins the field exactly.
    """

    def __init__(self, p: int, deg: int, modulus: tuple[int, ...] | None = None):
        if deg < 2:
            raise ValueError("extension degree must be >= 2; use PrimeField")
        self.base = PrimeField(p)
        self.p = p
        self.deg = deg
        if modulus is None:
            modulus = self._find_modulus(p, deg)
        else:
            modulus = tuple(c % p for c in modulus)
            if len(modulus) != deg + 1 or modulus[-1] != 1:
                raise ValueError("modulus must be monic of the stated degree")
            if not _poly_is_irreducible(modulus, p):
                raise ValueError(f"{poly_str(modulus)} is reducible over F_{p}")
        self.modulus = modulus
        self.descriptor = f"fpext:{p}:{deg}"

    @staticmethod
    def _find_modulus(p, deg):
        count = p**deg
        for idx in range(count):
            coeffs, v = [], idx
            for _ in range(deg):
                coeffs.append(v % p)
                v //= p
            f = tuple(coeffs + [1])
            if _poly_is_irreducible(f, p):
                return f
        raise RuntimeError("unreachable: irreducibles exist for every degree")

    def _canon(self, coeffs):
        c = [x % self.p for x in coeffs]
        _, rem = _poly_divmod(c, self.modulus, self.p) if len(c) > self.deg else (None, _poly_trim(c))
        return tuple(rem) + (0,) * (self.deg - len(rem))

    @property
    def zero(self):
        return (0,) * self.deg

    @property
    def one(self):
        return (1,) + (0,) * (self.deg - 1)

    @property
    def order(self):
        return self.p**self.deg

    @property
    def char(self):
        return self.p

    def of_int(self, n):
        return (n % self.p,) + (0,) * (self.deg - 1)

    def gen(self):
        """The residue class of x."""
        return self._canon([0, 1])

    def add(self, a, b):
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def neg(self, a):
        return tuple((-x) % self.p for x in a)

    def mul(self, a, b):
        rem = _poly_mulmod(a, b, self.modulus, self.p)
        return tuple(rem) + (0,) * (self.deg - len(rem))

    def inv(self, a):
        if self.is_zero(a):
            raise DivisionByZero(f"1/0 in F_{self.p}^{self.deg}")
        # Extended Euclid in F_p[x]: s*a + t*modulus = gcd = const.
        r0, r1 = _poly_trim(list(self.modulus)), _poly_trim(list(a))
        s0, s1 = (), (1,)
        while r1:
            q, r = _poly_divmod(r0, r1, self.p)
            r0, r1 = r1, r
            qs1 = self._polymul_plain(q, s1)
            s0, s1 = s1, self._polysub_plain(s0, qs1)
        c_inv = pow(r0[0], self.p - 2, self.p)
        res = [x * c_inv % self.p for x in s0]
        return self._canon(res)

    def _polymul_plain(self, a, b):
        if not a or not b:
            return ()
        out = [0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % self.p
        return _poly_trim(out)

    def _polysub_plain(self, a, b):
        n = max(len(a), len(b))
        out = [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % self.p for i in range(n)]
        return _poly_trim(out)

    def is_pm_one(self, a):
        return a == self.one or a == self.neg(self.one)

    def show(self, a):
        return f"[{','.join(str(c) for c in a)}] mod {self.p} / {poly_str(self.modulus)}"

    def parse(self, s):
        s = s.strip()
        if "mod" in s:
            body, rest = s.split("mod")
            rest = rest.strip()
            mod_p = int(rest.split("/")[0])
            if mod_p != self.p:
                raise DomainMismatch(f"scalar {s!r} is not over F_{self.p}")
            s = body.strip()
        if not (s.startswith("[") and s.endswith("]")):
            return self.of_int(int(s))
        coeffs = [int(t) for t in s[1:-1].split(",") if t.strip() != ""]
        return self._canon(coeffs)

    def random(self, rng):
        return tuple(rng.randrange(self.p) for _ in range(self.deg))

    def elements(self):
        count = self.order
        for idx in range(count):
            coeffs, v = [], idx
            for _ in range(self.deg):
                coeffs.append(v % self.p)
                v //= self.p
            yield tuple(coeffs)


def field_from_descriptor(desc: str) -> Field:
    """Inverse of Field.descriptor: 'rational' | 'fp:<p>' | 'fpext:<p>:<deg>'."""
    parts = desc.strip().split(":")
    if parts[0] == "rational":
        return Rationals()
    if parts[0] == "fp":
        return PrimeField(int(parts[1]))
    if parts[0] == "fpext":
        return ExtensionField(int(parts[1]), int(parts[2]))
    raise ValueError(f"unknown field descriptor {desc!r}")


def multiplicative_order(field: Field, a) -> int:
    if field.is_zero(a):
        raise ValueError("zero has no multiplicative order")
    n = field.order - 1
    acc, k = a, 1
    while acc != field.one:
        acc = field.mul(acc, a)
        k += 1
        if k > n:
            raise RuntimeError("order search exceeded group order")
    return k


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of n >= 1, ascending."""
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def roots_of_unity(p: int, field: Field):
    """p pairwise-distinct nonzero points suitable for degree interpolation.

    Returns (field2, points).  Over the rationals there are no nontrivial
    roots of unity, so the points are simply 1..p; downstream interpolation
    solves an exact Vandermonde system instead of relying on character sums.
    Over a finite field the points are the powers of an element of exact
    multiplicative order p (p may be composite); if the field order q has
    q % p != 1 the smallest extension containing them is constructed and
    returned as field2.
    """
    if p < 1:
        raise ValueError("need p >= 1")
    if isinstance(field, Rationals):
        return field, [Fraction(i) for i in range(1, p + 1)]

    char = field.char
    if p % char == 0:
        raise NoSuchRoot(f"order {p} is divisible by the characteristic {char}")
    if p == 1:
        return field, [field.one]

    q = field.order
    if q % p != 1:
        # Smallest degree D with p | char^D - 1 that keeps the current field
        # as a subfield (deg | D).
        cur_deg = 1 if isinstance(field, PrimeField) else field.deg
        d = 1
        while pow(char, d, p) != 1:
            d += 1
        D = d
        while D % cur_deg != 0:
            D += d
        field = ExtensionField(char, D) if D > 1 else PrimeField(char)
        q = field.order

    # w = a^((q-1)/p) has order dividing p; it has order exactly p iff
    # w^(p/l) != 1 for every prime l | p (p may be composite).
    cofactor = (q - 1) // p
    subgroup_checks = [p // ell for ell in prime_factors(p)]
    for a in field.elements():
        if field.is_zero(a):
            continue
        w = field.pow(a, cofactor)
        if all(field.pow(w, e) != field.one for e in subgroup_checks):
            roots = [w]
            for _ in range(p - 1):
                roots.append(field.mul(roots[-1], w))
            assert roots[-1] == field.one
            return field, roots
    raise NoSuchRoot(f"no element of order {p} in {field.descriptor}")


class LaurentPoly:
    """Finite Laurent polynomial in λ over a field: {exponent: coefficient}."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: Field, coeffs: dict[int, object] | None = None):
        self.field = field
        self.coeffs = {e: c for e, c in (coeffs or {}).items() if not field.is_zero(c)}

    @classmethod
    def const(cls, field, value):
        return cls(field, {0: value})

    @classmethod
    def lam(cls, field, exponent=1, coeff=None):
        return cls(field, {exponent: field.one if coeff is None else coeff})

    def is_zero(self):
        return not self.coeffs

    def coeff(self, e: int):
        return self.coeffs.get(e, self.field.zero)

    @property
    def min_degree(self):
        return min(self.coeffs) if self.coeffs else 0

    @property
    def max_degree(self):
        return max(self.coeffs) if self.coeffs else 0

    def _binop(self, other, f):
        self.field.check_same(other.field)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = f(out.get(e, self.field.zero), c)
        return LaurentPoly(self.field, out)

    def __add__(self, other):
        return self._binop(other, self.field.add)

    def __sub__(self, other):
        return self._binop(other, self.field.sub)

    def __neg__(self):
        return LaurentPoly(self.field, {e: self.field.neg(c) for e, c in self.coeffs.items()})

    def __mul__(self, other):
        self.field.check_same(other.field)
        out: dict[int, object] = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = e1 + e2
                prod = self.field.mul(c1, c2)
                out[e] = self.field.add(out.get(e, self.field.zero), prod)
        return LaurentPoly(self.field, out)

    def scale(self, k):
        return LaurentPoly(self.field, {e: self.field.mul(c, k) for e, c in self.coeffs.items()})

    def eval_at(self, lam0):
        """Evaluate at a nonzero field point (negative powers use inverses)."""
        acc = self.field.zero
        for e, c in self.coeffs.items():
            acc = self.field.add(acc, self.field.mul(c, self.field.pow(lam0, e)))
        return acc

    def __eq__(self, other):
        return (
            isinstance(other, LaurentPoly)
            and self.field == other.field
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.field, tuple(sorted(self.coeffs.items(), key=lambda kv: kv[0]))))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for e in sorted(self.coeffs):
            c = self.field.show(self.coeffs[e])
            if e == 0:
                parts.append(c)
            elif e == 1:
                parts.append(f"({c})*lam")
            else:
                parts.append(f"({c})*lam^{e}")
        return " + ".join(parts)
