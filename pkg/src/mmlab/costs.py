"""Evaluators for leading-constant, exponent, and recurrence formulas.

Plain arithmetic only: big integers and Fractions where a value is exact,
log2-space floats where only the magnitude matters.  No tensors are built
here; structural counterparts live in engines and kron_eval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .errors import HypothesisViolated, PreconditionViolated

# Exponent reached by the construction behind appendix_a_exponent in the
# N = S -> infinity limit.
LIMIT_EXPONENT = math.log(4000 / 27) / math.log(8)


@dataclass(frozen=True)
class CostReport:
    """One evaluated formula: the value plus the inputs that produced it."""

    label: str
    inputs: dict
    value: object
    formula_id: str

    def __post_init__(self):
        if isinstance(self.value, float) and not math.isfinite(self.value):
            raise ValueError(f"non-finite value for {self.formula_id}: {self.value}")


@dataclass(frozen=True)
class RankProfile:
    """Rank excess profile: a square tensor of side n has rank <= n^(2+f(n))."""

    f: Callable

    def excess(self, n) -> float:
        v = float(self.f(n))
        if not 0.0 < v <= 1.0:
            raise ValueError(f"profile value {v} at n={n} outside (0, 1]")
        return v


def constant_profile(eps: float) -> RankProfile:
    """f == eps: rank <= n^(2+eps) at every scale."""
    return RankProfile(lambda n: eps)


def bounded_rank_profile(a) -> RankProfile:
    """rank <= a n^2: f(n) = log2(a)/log2(n), clamped into (0, 1]."""
    if a <= 1:
        raise PreconditionViolated(f"need a > 1, got {a}")
    la = math.log2(a)
    return RankProfile(lambda n: min(1.0, la / math.log2(n)))


def polylog_rank_profile(c) -> RankProfile:
    """rank <= n^2 (log2 n)^c: f(n) = c log2 log2 n / log2 n, clamped."""
    if c <= 0:
        raise PreconditionViolated(f"need c > 0, got {c}")

    def f(n):
        ln = math.log2(n)
        return min(1.0, c * math.log2(max(ln, 2.0)) / ln)

    return RankProfile(f)


def standard_recursion_constant(n: int, t: int, k: int, costs) -> CostReport:
    """Operation bound for the k-th Kronecker power of a square algorithm.

    costs = (enc_x, enc_y, dec) one-shot operation counts of the three
    linear maps of a rank-t algorithm for side-n matrix multiplication.
    Each map is re-applied along a geometric blowup, so its cost picks up
    the factor (t^k - n^(2k)) / (t - n^2); the products cost t^k.
    """
    c1, c2, c3 = costs
    if n < 1 or k < 1:
        raise PreconditionViolated(f"need n, k >= 1, got n={n}, k={k}")
    if t <= n * n:
        raise PreconditionViolated(f"need t > n^2, got t={t}, n^2={n * n}")
    geo = (t ** k - n ** (2 * k)) // (t - n * n)
    value = (c1 + c2 + c3) * geo + t ** k
    return CostReport(
        "square recursion operation bound",
        {"n": n, "t": t, "k": k, "costs": tuple(costs), "stage_factor": geo},
        value, "standard-recursion")


def rect_reduction_bound(n: int, t: int, k: int, t_enc, t_dec) -> CostReport:
    """Square-to-rectangular reduction bound for side n^k.

    t_enc bounds the cost of the t x n^2 x n^(2(k-1)) product applied by
    each encoding map, t_dec the n^2 x t x n^(2(k-1)) product applied by
    the decoding map.  Requires t >= 2 n^2, which every rank bound for
    side-n matrix multiplication satisfies.
    """
    if n < 1 or k < 1:
        raise PreconditionViolated(f"need n, k >= 1, got n={n}, k={k}")
    if t < 2 * n * n:
        raise HypothesisViolated(f"need t >= 2 n^2, got t={t}, 2n^2={2 * n * n}")
    denom = n ** (2 * (k - 1))
    value = (Fraction(t) ** k
             + Fraction(4 * t ** (k - 1), denom) * Fraction(t_enc)
             + Fraction(2 * t ** (k - 1), denom) * Fraction(t_dec))
    return CostReport(
        "rectangular reduction operation bound",
        {"n": n, "t": t, "k": k, "t_enc": t_enc, "t_dec": t_dec},
        value, "rect-reduction")


def remark_optimizer(m: int, h: int, k: int) -> CostReport:
    """Best integer s for the classic leading constant 3 m^(2s) H^(k/s).

    The continuous optimum is s* = sqrt(k ln H / (2 ln m)); the expression
    is convex in s, so the best integer is a neighbor of s*.  The value is
    log2 of the constant.  Both single-constant normalizations are echoed:
    c0 with constant = c0^sqrt(k), and c with constant = c^(1 + sqrt(k/2)).
    """
    if m < 2 or h < 2:
        raise PreconditionViolated(f"need m, H >= 2, got m={m}, H={h}")
    if k < 1:
        raise PreconditionViolated(f"need k >= 1, got k={k}")
    lm, lh = math.log2(m), math.log2(h)

    def const_log2(s):
        return math.log2(3.0) + 2.0 * s * lm + (k / s) * lh

    s_star = math.sqrt(k * math.log(h) / (2.0 * math.log(m)))
    cands = {max(1, math.floor(s_star)), max(1, math.ceil(s_star))}
    s_best = min(cands, key=const_log2)
    v = const_log2(s_best)
    inputs = {"m": m, "H": h, "k": k, "s": s_best, "s_star": s_star,
              "c0_log2": v / math.sqrt(k),
              "c_log2": v / (1.0 + math.sqrt(k / 2.0))}
    return CostReport("classic leading constant (log2)", inputs, v,
                      "remark-optimizer")


def curromega_f(n, c: float = 1.0) -> float:
    """Exponent excess profile of the current-best construction family."""
    if n <= 1:
        raise PreconditionViolated(f"need N > 1, got {n}")
    return c / math.sqrt(math.log2(n))


def improved_constant_bounds(n_param: int, c1: float, c2: float, c3: float,
                             omega0: float = 2.372,
                             f_const: float = 1.0) -> CostReport:
    """Size-independent leading constant of the recursive scheme, in log2.

    The family parameter N fixes H = 2^(c1 N), m = 2^(c2 N), and a copy
    count 2^(c3 N / log N).  The rank of the side-m tensor is bounded by
    running the same family at sqrt(N), which gives
    log2 r = (omega0 + f(sqrt(N)) + c1/(c2 sqrt(N))) log2 m.  The leading
    constant is H / m^((omega0 + f(N)) log_r H); the coefficient of the
    low-order m^(2k) term is 3 r log_r H.  All hidden absolute constants
    are explicit parameters defaulting to 1.
    """
    if n_param < 2:
        raise PreconditionViolated(f"need N >= 2, got {n_param}")
    lh = c1 * n_param
    lm = c2 * n_param
    f_n = curromega_f(n_param, f_const)
    f_sqrt = curromega_f(math.sqrt(n_param), f_const)
    lr = (omega0 + f_sqrt + c1 / (c2 * math.sqrt(n_param))) * lm
    log_r_h = lh / lr
    leading_log2 = lh * (1.0 - (omega0 + f_n) * lm / lr)
    loworder_log2 = math.log2(3.0) + lr + math.log2(log_r_h)
    inputs = {"N": n_param, "C1": c1, "C2": c2, "C3": c3, "omega0": omega0,
              "f_const": f_const, "f_N": f_n, "f_sqrtN": f_sqrt,
              "H_log2": lh, "m_log2": lm,
              "copies_log2": c3 * n_param / math.log2(n_param),
              "r_log2": lr, "log_r_H": log_r_h,
              "loworder_log2": loworder_log2}
    return CostReport("improved leading constant (log2)", inputs,
                      leading_log2, "improved-leading")


def remark_group_old_constant_log2(h: int, m: int, k: int) -> float:
    """log2 of the k-dependent constant H^sqrt(24 k log m / log H)."""
    if h < 1 or m < 1 or k < 1:
        raise PreconditionViolated("need H, m, k >= 1")
    lh, lm = math.log2(h), math.log2(m)
    return math.sqrt(24.0 * k * lm * lh)


def group_leading_constant(order_g: int, h: int, m: int, r: int,
                           r_tg: int) -> CostReport:
    """New group-method leading constant vs. the old k-dependent one.

    New: 16 |G|^1.5 / (R(T_G)/H)^(log_r H + 1), independent of k and never
    above 16 |G|^1.5 because R(T_G) >= H.  Old: H^sqrt(24 k log m / log H).
    The crossover k (smallest k where the old constant is at least the new
    one) is echoed; it is infinite when H = 1 or m = 1.
    """
    if r <= 1:
        raise PreconditionViolated(f"need r > 1, got {r}")
    if h < 1 or r_tg < h:
        raise PreconditionViolated(f"need R_TG >= H >= 1, got H={h}, R_TG={r_tg}")
    if order_g < 1 or m < 1:
        raise PreconditionViolated("need |G|, m >= 1")
    log_r_h = math.log(h) / math.log(r)
    ratio_log2 = math.log2(r_tg) - math.log2(h)
    cap_log2 = 4.0 + 1.5 * math.log2(order_g)
    new_log2 = cap_log2 - (log_r_h + 1.0) * ratio_log2
    lh, lm = math.log2(h), math.log2(m)
    if new_log2 <= 0.0:
        crossover = 1
    elif lh == 0.0 or lm == 0.0:
        crossover = math.inf
    else:
        crossover = max(1, math.ceil(new_log2 ** 2 / (24.0 * lm * lh)))
        while (crossover > 1 and
               remark_group_old_constant_log2(h, m, crossover - 1) >= new_log2):
            crossover -= 1
        while remark_group_old_constant_log2(h, m, crossover) < new_log2:
            crossover += 1
    inputs = {"order_G": order_g, "H": h, "m": m, "r": r, "R_TG": r_tg,
              "log_r_H": log_r_h, "cap_log2": cap_log2,
              "crossover_k": crossover}
    return CostReport("group leading constant (log2)", inputs, new_log2,
                      "group-leading")


def elkin_size(m_mod: int, convention: str = "log2") -> int:
    """Progression-free subset size of Z_M from the digit-sphere bound.

    floor(M (log M)^(1/4) / 2^(2 sqrt(2 log2 M))) with unit constant,
    clamped to at least 1 so the guarantee stays a usable set size at tiny
    M.  The fourth-root log is base 2 by default; "ln" switches it to the
    natural log.  The denominator's logs are base 2 in both conventions.
    """
    if m_mod < 2:
        raise PreconditionViolated(f"need M >= 2, got {m_mod}")
    l2 = math.log2(m_mod)
    if convention == "log2":
        num_log2 = 0.25 * math.log2(l2) if l2 > 1.0 else 0.0
    elif convention == "ln":
        num_log2 = 0.25 * math.log2(math.log(m_mod))
    else:
        raise ValueError(f"unknown convention {convention!r}")
    lx = num_log2 - 2.0 * math.sqrt(2.0 * l2)
    shift = math.floor(lx)
    mantissa = 2.0 ** (lx - shift)
    exact = m_mod * Fraction(mantissa) * Fraction(2) ** shift
    return max(1, math.floor(exact))


def appendix_a_exponent(n: int, s: int, convention: str = "display") -> CostReport:
    """Exponent reached by ranking the side-8^(SN) tensor, computed in log2.

    The chain is M = 2 C(2N, N) + 1; |B| = elkin_size(M);
    A = (|B|/M^2) C(3N;N,N,N)/4; C = ((1 + 12N) 1000^N / A)^S * A;
    exponent = log C / log 8^(SN), with limit LIMIT_EXPONENT as N = S grows.

    Conventions: "display" (default) evaluates the unit-constant closed
    form C = N^(3S/4) 4000^(NS) 2^(4 sqrt(N) S) / 3^(3NS) * 3^(3N) /
    (N^(1/4) 2^(4 sqrt(N)) 2^(2N)), which is what reproduces the quoted
    exponent table; "binomial-log2" and "binomial-ln" evaluate the chain
    with exact big-integer binomials and the corresponding elkin_size
    convention, which drifts above the table for small N.
    """
    if n < 1 or s < 1:
        raise PreconditionViolated(f"need N, S >= 1, got N={n}, S={s}")
    inputs = {"N": n, "S": s, "convention": convention, "limit": LIMIT_EXPONENT}
    if convention == "display":
        l3, sq = math.log2(3.0), math.sqrt(n)
        c_log2 = ((3.0 * s / 4.0) * math.log2(n) + n * s * math.log2(4000.0)
                  + 4.0 * sq * s - 3.0 * n * s * l3
                  + 3.0 * n * l3 - 0.25 * math.log2(n) - 4.0 * sq - 2.0 * n)
    elif convention in ("binomial-log2", "binomial-ln"):
        m_mod = 2 * math.comb(2 * n, n) + 1
        b_size = elkin_size(m_mod, convention.removeprefix("binomial-"))
        tri_log2 = math.log2(math.comb(3 * n, n)) + math.log2(math.comb(2 * n, n))
        a_log2 = math.log2(b_size) - 2.0 * math.log2(m_mod) + tri_log2 - 2.0
        rank_log2 = math.log2(1 + 12 * n) + n * math.log2(1000.0)
        c_log2 = s * (rank_log2 - a_log2) + a_log2
        inputs.update({"M_log2": math.log2(m_mod), "B_log2": math.log2(b_size),
                       "A_log2": a_log2})
    else:
        raise ValueError(f"unknown convention {convention!r}")
    inputs["C_log2"] = c_log2
    return CostReport("appendix-a exponent", inputs, c_log2 / (3.0 * s * n),
                      "appendix-a")


def omega2_hf(profile: RankProfile, m) -> CostReport:
    """The recurrence exponent sum h_f(m), with limit floor(log2 log2 m).

    h_f(m) = sum over l of (3 / 2^(l+1)) f(m^(1 / 2^(l+2))).  The weights
    sum to strictly less than 3, so h_f(m) < 3 sup f.
    """
    if m < 4:
        raise PreconditionViolated(f"need m >= 4, got {m}")
    l2m = math.log2(m)
    lim = math.floor(math.log2(l2m))
    terms = []
    for ell in range(lim + 1):
        arg = 2.0 ** (l2m / 2 ** (ell + 2))
        terms.append((3.0 / 2 ** (ell + 1)) * profile.excess(arg))
    weight_sum = sum(3.0 / 2 ** (ell + 1) for ell in range(lim + 1))
    inputs = {"m": m, "limit": lim, "terms": tuple(terms),
              "weight_sum": weight_sum}
    return CostReport("h_f exponent sum", inputs, sum(terms), "hf-sum")


def _naive_base_g(profile: RankProfile, size) -> float:
    # Naive side-x multiplication costs 2x^3 - x^2 operations in total;
    # g normalizes by x^(2 + f(x)).
    total = 2.0 * size ** 3 - size ** 2
    return total / size ** (2.0 + profile.excess(size))


def omega2_recurrence(profile: RankProfile, m, base_g=None,
                      o_constant=None) -> CostReport:
    """Unroll g(m) <= 9 m^((3/2) f(m^(1/4))) g(sqrt(m)) down to size < 16.

    Returns log2 of the unrolled bound on g(m) and compares it with the
    closed form (constant) * log2(m) * m^(h_f(m)).  With o_constant=None
    the minimal constant making the closed form hold is reported; a
    supplied constant that is too small raises ValueError.
    """
    if m < 16:
        raise PreconditionViolated(f"need m >= 16, got {m}")
    # Track sizes in log2 space; m itself may exceed float range.
    log2_g = 0.0
    lsize = math.log2(m)
    steps = 0
    while lsize >= 4.0:
        log2_g += math.log2(9.0)
        log2_g += 1.5 * profile.excess(2.0 ** (lsize / 4.0)) * lsize
        lsize /= 2.0
        steps += 1
    size = 2.0 ** lsize
    base_val = float(base_g) if base_g is not None else _naive_base_g(profile, size)
    if base_val <= 0.0:
        raise PreconditionViolated(f"base g must be positive, got {base_val}")
    log2_g += math.log2(base_val)
    hf = omega2_hf(profile, m).value
    bare_closed_log2 = math.log2(math.log2(m)) + hf * math.log2(m)
    min_const_log2 = log2_g - bare_closed_log2
    if o_constant is None:
        const_log2 = min_const_log2
    else:
        const_log2 = math.log2(o_constant)
        if log2_g > const_log2 + bare_closed_log2 + 1e-9:
            raise ValueError(
                f"unrolled bound 2^{log2_g:.3f} exceeds closed form with "
                f"constant {o_constant}")
    inputs = {"m": m, "steps": steps, "base_size": size, "base_g": base_val,
              "hf": hf, "closed_log2": const_log2 + bare_closed_log2,
              "o_constant_log2": const_log2,
              "min_o_constant_log2": min_const_log2}
    return CostReport("unrolled recurrence bound (log2)", inputs, log2_g,
                      "omega2-recurrence")


def asymptotic_sum_check(shapes, r, omega_candidate) -> bool:
    """Does sum (n m d)^(omega/3) <= r hold at the candidate exponent?"""
    total = sum((n * m * d) ** (omega_candidate / 3.0) for (n, m, d) in shapes)
    return total <= r


def asymptotic_sum_omega(shapes, r, tol: float = 1e-9, lo: float = 0.0,
                         hi: float = 6.0) -> CostReport:
    """Largest exponent in [lo, hi] satisfying the sum inequality, by bisection."""
    if not asymptotic_sum_check(shapes, r, lo):
        raise PreconditionViolated("inequality fails at the lower endpoint")
    at_upper = asymptotic_sum_check(shapes, r, hi)
    if not at_upper:
        low, high = lo, hi
        while high - low > tol:
            mid = (low + high) / 2.0
            if asymptotic_sum_check(shapes, r, mid):
                low = mid
            else:
                high = mid
        value = low
    else:
        value = hi
    inputs = {"shapes": tuple(tuple(s) for s in shapes), "r": r, "tol": tol,
              "lo": lo, "hi": hi, "not_binding": at_upper}
    return CostReport("implied exponent bound", inputs, value,
                      "asymptotic-sum")
