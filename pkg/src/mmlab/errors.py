"""Exception hierarchy shared by all mmlab modules."""


class MMLabError(Exception):
    """Base class for all library errors."""


class DomainMismatch(MMLabError):
    """Operands belong to different fields."""


class DivisionByZero(MMLabError):
    """Exact division by the field zero."""


class NoSuchRoot(MMLabError):
    """Requested root of unity cannot exist (order divisible by char)."""


class NoSuitableRoot(NoSuchRoot):
    """The given field holds no primitive root of unity of the needed order."""


class SchemaError(MMLabError):
    """A JSON/CSV document does not match its declared schema."""


class DimMismatch(MMLabError):
    """Tensor or matrix dimensions are incompatible."""


class ShapeUnknown(MMLabError):
    """Operation needs matmul-shape metadata that is absent."""


class ShapeMismatch(MMLabError):
    """Algorithm and operand shapes disagree."""


class WitnessInvalid(MMLabError):
    """A zero-out witness does not produce the claimed sub-tensor."""


class NotDivisible(MMLabError):
    """A block split was requested along a non-divisible axis."""


class KTooSmall(MMLabError):
    """Recursion depth is too small for the requested bootstrap."""


class HypothesisViolated(MMLabError):
    """A cost lemma's arithmetic hypothesis fails for these inputs."""


class ZeroPoint(MMLabError):
    """Interpolation points must be nonzero and pairwise distinct."""


class SingularSystem(MMLabError):
    """An exact linear solve hit a singular matrix."""


class EvenModulus(MMLabError):
    """Progression-free hashing needs an odd modulus."""


class TooLargeForExhaustive(MMLabError):
    """Exhaustive search refused above the documented size cutoff."""


class TooLarge(MMLabError):
    """Materializing the requested object would exceed desk scale."""


class PreconditionViolated(MMLabError):
    """Inputs fail a documented arithmetic precondition."""


class InfeasibleRounding(MMLabError):
    """Integer rounding of a type distribution left no valid assignment."""
