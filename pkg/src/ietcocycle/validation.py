"""Input checks shared by the estimators and the command line."""
from fractions import Fraction

from .combinatorics import Permutation, parse_permutation, validate_permutation
from .errors import DimensionMismatch, NonPositiveLength, NotPrime


def check_permutation(perm) -> Permutation:
    """Coerce a string or Permutation to a validated irreducible Permutation."""
    if isinstance(perm, Permutation):
        return validate_permutation(perm.top, perm.bottom, perm.alphabet)
    if isinstance(perm, str):
        return parse_permutation(perm)
    top, bottom = perm
    return validate_permutation(top, bottom)


def check_lengths(lengths, d: int) -> list:
    vals = [Fraction(x) for x in lengths]
    if len(vals) != d:
        raise DimensionMismatch(f"expected {d} lengths, got {len(vals)}")
    if any(v <= 0 for v in vals):
        raise NonPositiveLength(f"lengths must be positive: {list(lengths)}")
    return vals


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def check_prime(p: int) -> int:
    if not is_prime(int(p)):
        raise NotPrime(f"{p} is not prime")
    return int(p)


def check_config(cfg) -> None:
    from .lyapunov import FIBER_MODES

    if not cfg.orbit_length >= cfg.renorm_period >= 1:
        raise ValueError("need orbit_length >= renorm_period >= 1")
    if cfg.precision_bits < 64:
        raise ValueError("precision_bits must be at least 64")
    if cfg.segments < 1:
        raise ValueError("segments must be positive")
    if cfg.fiber_mode not in FIBER_MODES:
        raise ValueError(f"fiber_mode must be one of {FIBER_MODES}")
    if cfg.fiber_mode == "rational":
        if cfg.p is None:
            raise ValueError("rational fiber mode needs p")
        check_prime(cfg.p)
        if cfg.nvec not in (None, "all") and not any(int(x) % cfg.p for x in cfg.nvec):
            raise ValueError("nvec must be nonzero mod p")
