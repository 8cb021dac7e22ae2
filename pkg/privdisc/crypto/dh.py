"""Diffie-Hellman over NIST P-256.

Shares travel as 33-byte compressed points. ``enc(g^ab)`` is the 32-byte
x-coordinate returned by ECDH.
"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric import ec

from privdisc.crypto.entropy import resolve
from privdisc.error import MalformedError

CURVE = ec.SECP256R1()
ORDER = 0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551
SHARE_BYTES = 33
SECRET_BYTES = 32


class DHKeyPair(object):
    """An exponent and its public share.

    :meth:`erase` drops the exponent; the share stays readable.
    """

    def __init__(self, private_key):
        self._private = private_key
        self.share = encode_share(private_key.public_key())

    @classmethod
    def generate(cls, entropy=None):
        exponent = resolve(entropy).scalar(ORDER)
        return cls(ec.derive_private_key(exponent, CURVE))

    @classmethod
    def from_exponent(cls, exponent):
        return cls(ec.derive_private_key(exponent, CURVE))

    @property
    def erased(self):
        return self._private is None

    @property
    def exponent(self):
        if self._private is None:
            return None
        return self._private.private_numbers().private_value

    def exchange(self, peer_share):
        """enc(peer^exponent) for an encoded peer share"""
        if self._private is None:
            raise ValueError("DH exponent already erased")
        return self._private.exchange(ec.ECDH(), decode_share(peer_share))

    def erase(self):
        self._private = None


def encode_share(public_key):
    return public_key.public_bytes(
        serialization.Encoding.X962, serialization.PublicFormat.CompressedPoint
    )


def decode_share(data):
    data = bytes(data)
    if len(data) != SHARE_BYTES:
        raise MalformedError("DH share must be %i bytes" % SHARE_BYTES)
    try:
        return ec.EllipticCurvePublicKey.from_encoded_point(CURVE, data)
    except ValueError as e:
        raise MalformedError("invalid DH share: %s" % e)


def validate_share(data):
    decode_share(data)
    return bytes(data)


def exchange(exponent, peer_share):
    """enc(peer^exponent) from a raw exponent, as used with revealed state"""
    return DHKeyPair.from_exponent(exponent).exchange(peer_share)
