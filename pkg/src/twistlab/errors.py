class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class PowerOverflowError(OverflowError):
    """``t**b`` would leave finite double precision."""
