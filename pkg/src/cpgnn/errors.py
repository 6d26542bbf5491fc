"""Error types shared across the package.

Invalid arguments raise the builtin ``ValueError``; only failure modes
that callers may want to handle separately get their own class.
"""


class CapacityError(RuntimeError):
    """Materializing a dense object would exceed the configured size guard."""


class NumericalError(ArithmeticError):
    """A computation produced non-finite values; the message names the stage."""
