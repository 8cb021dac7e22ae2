"""Strict tag-length-value encoding.

A body is a sequence of fields ``tag(1) || length(2, big-endian) || value``.
Readers consume fields in a fixed order; a tag other than the one expected
(unknown or out of order) and any trailing bytes are errors.
"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
import struct

from privdisc.error import MalformedError
from privdisc.error import OversizeError
from privdisc.error import TruncatedError

MAX_VALUE = 0xFFFF

_header = struct.Struct('!BH')


def field(tag, value):
    value = bytes(value)
    if len(value) > MAX_VALUE:
        raise OversizeError("field 0x%02x of %i bytes exceeds %i" % (tag, len(value), MAX_VALUE))
    return _header.pack(tag, len(value)) + value


def uint_bytes(n, size):
    return int(n).to_bytes(size, 'big')


class Writer(object):
    def __init__(self):
        self._parts = []

    def add(self, tag, value):
        self._parts.append(field(tag, value))
        return self

    def add_uint(self, tag, n, size):
        return self.add(tag, uint_bytes(n, size))

    def getvalue(self):
        return b''.join(self._parts)


def encode(*fields):
    """body from (tag, value) pairs"""
    w = Writer()
    for tag, value in fields:
        w.add(tag, value)
    return w.getvalue()


class Reader(object):
    def __init__(self, data, what='object'):
        self.data = bytes(data)
        self.pos = 0
        self.what = what

    def _error(self, msg):
        return MalformedError("%s: %s" % (self.what, msg))

    def at_end(self):
        return self.pos >= len(self.data)

    def peek_tag(self):
        if self.at_end():
            return None
        return self.data[self.pos]

    def read(self):
        """the next (tag, value) field"""
        if len(self.data) - self.pos < _header.size:
            raise TruncatedError("%s: truncated field header" % self.what)
        tag, length = _header.unpack_from(self.data, self.pos)
        start = self.pos + _header.size
        end = start + length
        if end > len(self.data):
            raise TruncatedError("%s: truncated field 0x%02x" % (self.what, tag))
        self.pos = end
        return tag, self.data[start:end]

    def expect(self, tag, size=None):
        got = self.peek_tag()
        if got is None:
            raise TruncatedError("%s: missing field 0x%02x" % (self.what, tag))
        if got != tag:
            raise self._error("unexpected field 0x%02x, expected 0x%02x" % (got, tag))
        _, value = self.read()
        if size is not None and len(value) != size:
            raise self._error("field 0x%02x must be %i bytes" % (tag, size))
        return value

    def optional(self, tag, size=None):
        if self.peek_tag() != tag:
            return None
        return self.expect(tag, size)

    def repeated(self, tag):
        values = []
        while self.peek_tag() == tag:
            values.append(self.expect(tag))
        return values

    def uint(self, tag, size):
        return int.from_bytes(self.expect(tag, size), 'big')

    def str(self, tag):
        try:
            return self.expect(tag).decode('utf8')
        except UnicodeDecodeError:
            raise self._error("field 0x%02x is not UTF-8" % tag)

    def done(self):
        if not self.at_end():
            raise self._error("unexpected field 0x%02x" % self.data[self.pos])
