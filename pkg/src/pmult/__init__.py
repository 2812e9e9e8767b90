"""Sign tables f with f(pn) = f(p) f(n) for p in a finite prime set, and bounded partial sums."""
from .core import PrimeSet, SignSequence, prefix_sums, rough_decompose
from .errors import InvariantViolation, NotFound, UnsetValue

__all__ = ["PrimeSet", "SignSequence", "prefix_sums", "rough_decompose",
           "InvariantViolation", "NotFound", "UnsetValue"]
