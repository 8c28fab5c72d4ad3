"""mmlab: an exact-arithmetic laboratory for fast matrix multiplication.

Everything is computed over exact scalar domains (rationals, prime fields,
small extension fields): tensor identities, bilinear-algorithm verification,
operation-counted Kronecker evaluation, Coppersmith-Winograd border
decompositions and laser degenerations, group-algebra algorithms, and the
closed-form cost/exponent evaluators that tie them together.
"""

__version__ = "0.1.0"
