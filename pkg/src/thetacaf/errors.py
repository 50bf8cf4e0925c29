"""Exception hierarchy shared by all thetacaf modules."""


class ThetacafError(Exception):
    """Base class for all library errors."""


class RankDeficient(ThetacafError):
    """Integer matrix does not have full row rank (or m <= n)."""


class Overflow(ThetacafError):
    """Fixed-width integer arithmetic would wrap.

    Unused with arbitrary-precision integers, kept so callers can
    handle both arithmetic backends uniformly.
    """


class NumericallyRankDeficient(ThetacafError):
    """Smallest singular value below the relative rank threshold."""


class Singular(ThetacafError):
    """Matrix determinant is zero to within tolerance."""


class EnumerationBudgetExceeded(ThetacafError):
    """Predicted lattice point count exceeds the configured budget."""


class NotNested(ThetacafError):
    """Coarse lattice is not a sublattice of the fine lattice."""


class UnknownLattice(ThetacafError):
    """Catalog name not recognised."""


class GeneratorUnavailable(ThetacafError):
    """Catalog entry has no generator matrix (theta closed form only)."""


class UnknownForm(ThetacafError):
    """No closed-form theta series registered for this entry."""


class DomainError(ThetacafError):
    """Argument outside the mathematical domain (e.g. q not in [0,1))."""


class DimensionMismatch(ThetacafError):
    """Vector/matrix dimensions are inconsistent."""


class NonIntegerLattice(ThetacafError):
    """HNF decomposition requires integer generator matrices."""


class InconsistentBundle(ThetacafError):
    """Decomposition bundle does not match the channel/lattices."""


class Degenerate(ThetacafError):
    """Measure-zero channel event collapsing the random lattice."""


class ConfigError(ThetacafError):
    """Invalid CLI/run configuration."""
