"""Authenticated encryption: ChaCha20-Poly1305 with counter nonces."""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305

from privdisc.error import CounterOverflow
from privdisc.error import DecryptionFailed

KEY_BYTES = 32
NONCE_BYTES = 12
TAG_BYTES = 16

ZERO_NONCE = bytes(NONCE_BYTES)

CLIENT_DIRECTION = b'clnt'
SERVER_DIRECTION = b'srvr'

_MAX_COUNTER = 2 ** 64 - 1


def seal(key, nonce, plaintext, ad=b''):
    return ChaCha20Poly1305(bytes(key)).encrypt(nonce, bytes(plaintext), ad or None)


def open_(key, nonce, ciphertext, ad=b''):
    """decrypt, raising DecryptionFailed on any authentication failure"""
    try:
        return ChaCha20Poly1305(bytes(key)).decrypt(
            nonce, bytes(ciphertext), ad or None
        )
    except (InvalidTag, ValueError):
        raise DecryptionFailed()


def direction_nonce(direction, counter):
    if len(direction) != 4:
        raise ValueError("direction tag must be 4 bytes, not %r" % direction)
    if not 0 <= counter <= _MAX_COUNTER:
        raise CounterOverflow("nonce counter %i out of range" % counter)
    return direction + counter.to_bytes(8, 'big')


class NonceSequence(object):
    """Per-direction nonce counter for one traffic key.

    A key is used by one session only, so (direction, counter) never
    repeats under it.
    """

    def __init__(self, direction):
        self.direction = direction
        self.counter = 0

    def next(self):
        nonce = direction_nonce(self.direction, self.counter)
        self.counter += 1
        return nonce


class Channel(object):
    """Sealing in one direction and opening in the other under a single key."""

    def __init__(self, key, send_direction, recv_direction):
        self.key = key
        self._send = NonceSequence(send_direction)
        self._recv = NonceSequence(recv_direction)

    def seal(self, plaintext, ad=b''):
        return seal(self.key, self._send.next(), plaintext, ad)

    def open(self, ciphertext, ad=b''):
        return open_(self.key, self._recv.next(), ciphertext, ad)
