"""Exception types.  Each carries the offending data where there is any."""


class StabcertError(Exception):
    """Base class for all library errors."""


class MembershipError(StabcertError, ValueError):
    """A point is not in the set it is required to lie in."""


class DirectionError(StabcertError, ValueError):
    """A direction pair is not tangent to the graph of the normal-cone map."""


class NonPolyhedralError(StabcertError, TypeError):
    """A set was given in a form other than an H-representation."""


class CqViolation(StabcertError):
    def __init__(self, message, u_star=None):
        super().__init__(message)
        self.u_star = u_star


class SignError(StabcertError, ValueError):
    """Sign pattern of (x, slack) does not match the index combination."""


class NotQ0Error(StabcertError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotCertifiedError(StabcertError):
    """The modulus was requested without an established verdict."""


class EmptyRegionError(StabcertError, ValueError):
    """No sample point of the region could be drawn near the reference point."""


class InvariantError(StabcertError, AssertionError):
    """An internal consistency re-check failed."""
