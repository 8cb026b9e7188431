"""Exception types shared across the package."""


class CimsetError(Exception):
    """Base class for all package errors."""


class DomainError(CimsetError):
    """Input is structurally valid but outside an operation's domain."""


class FormatError(CimsetError):
    """Malformed file or serialized object."""


class ResourceError(CimsetError):
    """Refused because a size or enumeration limit would be exceeded."""


class UnsupportedError(CimsetError):
    """Requested combination of features is deliberately not supported."""


class NotAVertexError(DomainError):
    """A 0/1 vector is not the characteristic imset of any family member."""


class DegeneratePairError(DomainError):
    """An operation on a pair of vertices received the same vertex twice."""
