import math
from typing import List, Tuple, TypeVar

T = TypeVar("T", int, float)

GOLDEN_MEAN = (math.sqrt(5.0) - 1.0) / 2.0


def parse_float_list(text: str) -> List[float]:
    """Parse a comma or whitespace separated list of floats.

    Example:
        >>> parse_float_list("1, 0.5")
        [1.0, 0.5]
        >>> parse_float_list("  2 3e-1 ")
        [2.0, 0.3]
        >>> parse_float_list("")
        []
    """
    return [float(item) for item in text.replace(",", " ").split()]


def parse_complex(text: str) -> complex:
    """Parse ``re`` or ``re, im`` into a complex number.

    Example:
        >>> parse_complex("0.5")
        (0.5+0j)
        >>> parse_complex("0, -0.25")
        -0.25j
    """
    values = parse_float_list(text)
    if not 1 <= len(values) <= 2:
        raise ValueError(f"Expected 're' or 're, im', got {text!r}")
    return complex(values[0], values[1] if len(values) == 2 else 0.0)


def ensure_positive(name: str, value: T) -> T:
    """Ensure that a parameter is strictly positive.

    Example:
        >>> ensure_positive("rho", 0.5)
        0.5
        >>> ensure_positive("rho", 0.0)
        Traceback (most recent call last):
        ...
        ValueError: rho must be positive, got 0.0
    """
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value!r}")
    return value


def fibonacci_convergent(n: int) -> Tuple[int, int]:
    """Return the n-th continued fraction convergent p/q of the golden mean.

    Example:
        >>> fibonacci_convergent(1)
        (1, 2)
        >>> fibonacci_convergent(12)
        (233, 377)
    """
    p, q = 1, 1
    for _ in range(n):
        p, q = q, p + q
    return p, q


def format_value(value: object) -> str:
    """Format a report value for text and key=value output.

    Example:
        >>> format_value(True)
        'true'
        >>> format_value(0.1)
        '0.1'
        >>> format_value(None)
        'none'
    """
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)
