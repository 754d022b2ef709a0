"""Exception types shared across the package."""


class InvariantError(ValueError):
    """A structural invariant of a quantum object was violated.

    Raised by constructors and validators when input data is not what it
    claims to be (non-Hermitian density matrix, incomplete projector family,
    Kraus set that is not trace preserving, and so on). The message names
    the violated invariant.
    """


class ParseError(ValueError):
    """An input file or document could not be read as its declared format.

    Distinct from :class:`InvariantError`: a file that parses fine but
    describes an invalid object raises the latter.
    """
