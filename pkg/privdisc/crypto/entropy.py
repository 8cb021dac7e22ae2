"""Randomness sources.

Every randomized operation in privdisc takes an optional ``entropy``
argument. ``None`` means the operating system's CSPRNG. Simulations and
tests pass a :class:`SeededEntropy` so that whole runs are reproducible.
"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
import hashlib
import os

from privdisc.error import EntropyError


class Entropy(object):
    """Base randomness source."""

    def bytes(self, n):
        raise NotImplementedError("Implement in subclasses")

    def scalar(self, order):
        """uniform integer in [1, order - 1]

        Draws 128 bits more than needed and reduces, so the bias is
        below 2**-128.
        """
        nbytes = (order.bit_length() + 7) // 8 + 16
        return int.from_bytes(self.bytes(nbytes), 'big') % (order - 1) + 1

    def fork(self, label):
        """an independent child source, for handing to another party"""
        return self


class SystemEntropy(Entropy):
    def bytes(self, n):
        try:
            return os.urandom(n)
        except (OSError, NotImplementedError) as e:
            raise EntropyError("system randomness unavailable: %s" % e)


class SeededEntropy(Entropy):
    """Deterministic SHA-256 counter stream.

    Not for production keys: identical seeds give identical keys.
    """

    def __init__(self, seed):
        if isinstance(seed, int):
            seed = seed.to_bytes(8, 'big')
        elif isinstance(seed, str):
            seed = seed.encode('utf8')
        self._seed = hashlib.sha256(b'privdisc-seed' + bytes(seed)).digest()
        self._counter = 0
        self._buffer = b''

    def bytes(self, n):
        while len(self._buffer) < n:
            block = hashlib.sha256(
                self._seed + self._counter.to_bytes(8, 'big')
            ).digest()
            self._counter += 1
            self._buffer += block
        out, self._buffer = self._buffer[:n], self._buffer[n:]
        return out

    def fork(self, label):
        if isinstance(label, str):
            label = label.encode('utf8')
        return SeededEntropy(hashlib.sha256(self._seed + b'/fork/' + label).digest())


system_entropy = SystemEntropy()


def resolve(entropy):
    """`entropy` if given, else the system source"""
    if entropy is None:
        return system_entropy
    return entropy
