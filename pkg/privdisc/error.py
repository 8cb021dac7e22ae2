# encoding: utf-8
"""Exception classes for privdisc.

Every error carries an ``exit_code``, which is what the ``privdisc`` command
returns when the error escapes a subcommand:

* 2 -- malformed input
* 3 -- not authorized
* 4 -- expired
* 5 -- cryptographic failure
* 1 -- anything else
"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.

__docformat__ = "restructuredtext en"

# Tell pytest not to collect this module
__test__ = {}

EXIT_OK = 0
EXIT_MALFORMED = 2
EXIT_NOT_AUTHORIZED = 3
EXIT_EXPIRED = 4
EXIT_CRYPTO = 5


# -------------------------------------------------------------------------------
# Error classes
# -------------------------------------------------------------------------------
class PrivDiscError(Exception):
    """Base exception that all of our exceptions inherit from.

    This can be raised by code that doesn't have any more specific
    information."""

    exit_code = 1


class EntropyError(PrivDiscError):
    """The randomness source failed."""


class DegenerateKeyError(PrivDiscError):
    """IBE extraction kept hitting a zero denominator."""

    exit_code = EXIT_CRYPTO


class OversizeError(PrivDiscError):
    """A payload or encoding exceeds its size budget."""

    exit_code = EXIT_MALFORMED


class InvalidNameError(PrivDiscError, ValueError):
    """A hierarchical name or name component is not well formed."""

    exit_code = EXIT_MALFORMED


class MalformedError(PrivDiscError):
    """Bytes do not decode to a valid object."""

    exit_code = EXIT_MALFORMED


class TruncatedError(MalformedError):
    """Input ended before the object was complete."""


class UnknownVersionError(MalformedError):
    """Frame magic names a format version we do not speak."""


class DecryptionFailed(PrivDiscError):
    """Single, indistinguishable decryption failure."""

    exit_code = EXIT_CRYPTO

    def __init__(self, msg="decryption failed"):
        super(DecryptionFailed, self).__init__(msg)


class NotAuthorized(PrivDiscError):
    """Our name does not satisfy the policy a ciphertext was addressed to."""

    exit_code = EXIT_NOT_AUTHORIZED


class BadSignature(PrivDiscError):
    exit_code = EXIT_CRYPTO


class ChainError(PrivDiscError):
    """A blessing failed validation."""

    exit_code = EXIT_CRYPTO


class BrokenLinkError(ChainError):
    pass


class UntrustedRootError(ChainError):
    pass


class ExpiredError(PrivDiscError):
    exit_code = EXIT_EXPIRED


class ReplayError(PrivDiscError):
    """A (bid, sid) pair was presented twice."""

    exit_code = EXIT_CRYPTO


class ReplayCacheFull(ReplayError):
    """The replay cache for a broadcast is at capacity; fail closed."""


class CounterOverflow(PrivDiscError):
    pass


class HandshakeAborted(PrivDiscError):
    """A handshake was abandoned. Never put on the wire.

    ``reason`` is a short machine-readable label, ``cause`` the
    underlying error, if any.
    """

    exit_code = EXIT_CRYPTO

    def __init__(self, reason, cause=None):
        self.reason = reason
        self.cause = cause
        super(HandshakeAborted, self).__init__(reason)
        if cause is not None:
            self.exit_code = getattr(cause, 'exit_code', self.exit_code)

    def __repr__(self):
        return "HandshakeAborted(%r)" % self.reason


class ScenarioError(PrivDiscError):
    """A simulation script is not well formed."""

    exit_code = EXIT_MALFORMED
