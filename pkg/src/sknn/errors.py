"""Exceptions shared across the scheme and runtime modules."""


class SknnError(Exception):
    pass


class DimensionMismatch(SknnError):
    """Point or query has the wrong number of coordinates."""


class NonpositiveR(SknnError):
    """Query blinding factor must be strictly positive."""


class KTooLarge(SknnError):
    """Requested more neighbors than there are points."""


class NormSlotMismatch(SknnError):
    """Decrypted point fails its squared-norm consistency check."""


class DecryptFailure(SknnError):
    """Query user could not decrypt the data owner's response."""


class FakeQuery(SknnError):
    """Query token failed the cloud server's verifiability condition."""


class ProtocolFailure(SknnError):
    """A multi-step protocol exchange could not be completed."""


class TransportError(SknnError):
    """Wire-level failure while exchanging protocol messages."""


class ParseError(SknnError):
    """Malformed input file; carries row/column context when known."""

    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col
