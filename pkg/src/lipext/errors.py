"""Exception hierarchy shared across the package."""


class LipextError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(LipextError):
    """Invalid problem configuration (bad box, basis, epsilon, grammar, ...)."""


class ConstructionError(LipextError):
    """A builder could not produce an object meeting its contract."""


class NetCapExceeded(ConstructionError):
    """A covering net would need more centers than the configured cap."""

    def __init__(self, needed, cap):
        self.needed = int(needed)
        self.cap = int(cap)
        super().__init__(
            f"covering net needs {self.needed} centers, exceeding the cap {self.cap}; "
            f"raise the cap (net_cap / LIPEXT_NET_CAP) or coarsen the instance"
        )


class EvalError(LipextError):
    """Evaluation failed (division by ~0, non-finite value, point outside cover)."""
