"""Group-algebra tensors of abelian groups and their DFT-based algorithms.

The structure tensor of the group algebra F[G] has rank exactly |G| when G
is abelian and F holds enough roots of unity: encode both inputs with the
character table F_G, multiply pointwise, and decode with the inverse
transform.  Everything here is exact; no floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

from .bilinear import BilinearAlgorithm, CountedMatrix
from .errors import DimMismatch, NoSuitableRoot, TooLarge
from .fields import Field, Rationals, prime_factors
from .tensors import Tensor

# Group orders are kept at desk scale: the tensor alone has |G|^2 entries.
_ORDER_CAP = 64


@dataclass(frozen=True)
class AbelianGroup:
    """Direct product of cyclic groups Z_n1 x ... x Z_nr.

    Elements are indexed 0..order-1 in mixed radix, most significant factor
    first, so index arithmetic matches the Kronecker-product convention used
    for matrices elsewhere.
    """

    factors: tuple[int, ...]

    def __post_init__(self):
        fac = tuple(int(n) for n in self.factors)
        if any(n < 1 for n in fac):
            raise ValueError(f"cyclic factors must be >= 1, got {fac}")
        object.__setattr__(self, "factors", fac)

    @property
    def order(self) -> int:
        return math.prod(self.factors)

    @property
    def exponent(self) -> int:
        """lcm of the cyclic factors; the maximal element order."""
        return reduce(math.lcm, self.factors, 1)

    @property
    def identity(self) -> int:
        return 0

    def element(self, index: int) -> tuple[int, ...]:
        """Mixed-radix digit tuple of an element index."""
        if not 0 <= index < self.order:
            raise ValueError(f"element index {index} outside 0..{self.order - 1}")
        digits = []
        for n in reversed(self.factors):
            index, d = divmod(index, n)
            digits.append(d)
        return tuple(reversed(digits))

    def index(self, element) -> int:
        element = tuple(element)
        if len(element) != len(self.factors):
            raise ValueError(f"expected {len(self.factors)} digits, got {element}")
        idx = 0
        for n, d in zip(self.factors, element):
            if not 0 <= d < n:
                raise ValueError(f"digit {d} outside 0..{n - 1}")
            idx = idx * n + d
        return idx

    def mul(self, i: int, j: int) -> int:
        a, b = self.element(i), self.element(j)
        return self.index((x + y) % n for n, x, y in zip(self.factors, a, b))

    def inverse(self, i: int) -> int:
        return self.index((-x) % n for n, x in zip(self.factors, self.element(i)))

    def irrep_dims(self) -> tuple[int, ...]:
        """All irreducible representations of an abelian group have dim 1."""
        return (1,) * self.order


@dataclass(frozen=True)
class GroupTensor:
    """Structure tensor of F[G]: coefficient of x_g y_h z_k is 1 iff gh = k."""

    group: AbelianGroup
    tensor: Tensor


def group_tensor(G: AbelianGroup, field: Field | None = None) -> GroupTensor:
    """The |G|x|G|x|G| tensor whose z-coefficients are the convolution f*g."""
    field = field if field is not None else Rationals()
    n = G.order
    if n > _ORDER_CAP:
        raise TooLarge(f"group order {n} exceeds cap {_ORDER_CAP}")
    entries = {(g, h, G.mul(g, h)): field.one
               for g in range(n) for h in range(n)}
    return GroupTensor(G, Tensor((n, n, n), field, entries))


def symmetric_convention(G: AbelianGroup, t: Tensor) -> Tensor:
    """Relabel the z axis by group inverse: gh = k becomes g h k' = identity.

    Involution; applying it to group_tensor(G).tensor yields the symmetric
    form whose support is the triples multiplying to the identity.
    """
    n = G.order
    if t.dims != (n, n, n):
        raise DimMismatch(f"tensor dims {t.dims} do not match group order {n}")
    entries = {(g, h, G.inverse(k)): v for (g, h, k), v in t.entries.items()}
    return Tensor(t.dims, t.field, entries)


def _primitive_root(field: Field, e: int):
    """Smallest field element of exact multiplicative order e.

    Unlike roots_of_unity this never extends the field: the DFT must live
    over the field the caller supplied.
    """
    if e == 1:
        return field.one
    if isinstance(field, Rationals):
        if e == 2:
            return field.neg(field.one)
        raise NoSuitableRoot(f"rationals hold no root of unity of order {e}")
    if field.order % e != 1:
        raise NoSuitableRoot(
            f"{field.descriptor} has no order-{e} root (field order {field.order}"
            f" is not 1 mod {e})")
    checks = [e // ell for ell in prime_factors(e)]
    for a in field.elements():
        if field.is_zero(a):
            continue
        if field.pow(a, e) == field.one and all(
                field.pow(a, c) != field.one for c in checks):
            return a
    raise NoSuitableRoot(f"no element of order {e} in {field.descriptor}")


def _cyclic_dft(n: int, field: Field, omega) -> CountedMatrix:
    # omega must have exact order n; all n^2 entries are nonzero.
    powers = [field.one]
    for _ in range(n - 1):
        powers.append(field.mul(powers[-1], omega))
    entries = {(r, c): powers[(r * c) % n] for r in range(n) for c in range(n)}
    return CountedMatrix(n, n, field, entries)


def dft_matrix(G: AbelianGroup, field: Field) -> CountedMatrix:
    """Character table of G: the Kronecker product of cyclic DFT matrices.

    Row chi, column g holds chi(g).  Requires a primitive root of unity of
    order exponent(G) in the field (over F_p: p = 1 mod exponent(G)).
    """
    e = G.exponent
    omega = _primitive_root(field, e)
    blocks = [_cyclic_dft(n, field, field.pow(omega, e // n)) for n in G.factors]
    return reduce(CountedMatrix.kron, blocks, CountedMatrix.identity(1, field))


def group_bilinear(G: AbelianGroup, field: Field | None = None) -> BilinearAlgorithm:
    """Rank-|G| bilinear algorithm for the group tensor.

    enc_x = enc_y = F_G; dec_z is the inverse transform, i.e. the entrywise
    inverse of F_G transposed, with the 1/|G| normalization folded in.
    """
    field = field if field is not None else Rationals()
    n = G.order
    if n > _ORDER_CAP:
        raise TooLarge(f"group order {n} exceeds cap {_ORDER_CAP}")
    f_g = dft_matrix(G, field)
    inv_n = field.inv(field.of_int(n))
    # Entries of F_G are roots of unity, so conjugation is inversion.
    dec = CountedMatrix(n, n, field,
                        {(c, r): field.mul(inv_n, field.inv(v))
                         for (r, c), v in f_g.entries.items()})
    return BilinearAlgorithm(f_g, f_g, dec)


def rank_bound_sum(irrep_dims, rank_oracle) -> int:
    """Bound R(T_G) by summing a rank oracle over the irrep dimensions."""
    return sum(rank_oracle(int(d)) for d in irrep_dims)
