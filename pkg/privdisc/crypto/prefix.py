"""Prefix encryption from IBE.

A principal named ``s1/s2/.../sn`` holds n IBE keys, one for each of
``s1``, ``s1/s2``, ... ``s1/.../sn``. Encrypting to a prefix is IBE
encryption to that prefix's canonical string, so any name that extends
the prefix (whole components only) can decrypt.

Policies are not hidden: a PrefixCiphertext carries its policy in the
clear.
"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
from collections import namedtuple

from privdisc.crypto.ibe import ibe_decrypt
from privdisc.crypto.ibe import ibe_encrypt
from privdisc.crypto.ibe import ibe_extract
from privdisc.error import InvalidNameError
from privdisc.error import NotAuthorized

MAX_COMPONENTS = 16
MAX_COMPONENT_BYTES = 64
SEPARATOR = '/'


def check_component(component):
    if not isinstance(component, str):
        raise InvalidNameError("name component must be str, not %r" % type(component))
    if not component:
        raise InvalidNameError("empty name component")
    if SEPARATOR in component:
        raise InvalidNameError("name component %r contains '/'" % component)
    if len(component.encode('utf8')) > MAX_COMPONENT_BYTES:
        raise InvalidNameError(
            "name component %r longer than %i bytes" % (component, MAX_COMPONENT_BYTES)
        )
    return component


class HierName(object):
    """A hierarchical name such as ``Alice/Family/Bob``."""

    __slots__ = ('components',)

    def __init__(self, components):
        components = tuple(components)
        if not components:
            raise InvalidNameError("a name needs at least one component")
        if len(components) > MAX_COMPONENTS:
            raise InvalidNameError(
                "name has %i components, at most %i allowed"
                % (len(components), MAX_COMPONENTS)
            )
        for c in components:
            check_component(c)
        self.components = components

    @classmethod
    def parse(cls, s):
        if isinstance(s, HierName):
            return s
        if isinstance(s, bytes):
            try:
                s = s.decode('utf8')
            except UnicodeDecodeError:
                raise InvalidNameError("name is not valid UTF-8")
        return cls(s.split(SEPARATOR))

    def __str__(self):
        return SEPARATOR.join(self.components)

    def __repr__(self):
        return "HierName(%r)" % str(self)

    def __len__(self):
        return len(self.components)

    def __eq__(self, other):
        if not isinstance(other, HierName):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __lt__(self, other):
        return str(self) < str(other)

    def encode(self):
        return str(self).encode('utf8')

    def truncate(self, n):
        return HierName(self.components[:n])

    def extend(self, component):
        return HierName(self.components + (component,))

    def is_prefix_of(self, other):
        """whole-component prefix test"""
        n = len(self.components)
        return n <= len(other.components) and other.components[:n] == self.components

    def prefixes(self):
        """[s1, s1/s2, ..., self]"""
        return [self.truncate(i) for i in range(1, len(self.components) + 1)]


class PrefixPolicy(object):
    """A set of name prefixes, any one of which authorizes.

    Stored normalized (no prefix extends another, since the shorter one
    already admits every name the longer one does) and sorted by canonical
    string.
    """

    __slots__ = ('prefixes',)

    def __init__(self, prefixes):
        names = {HierName.parse(p) for p in prefixes}
        if not names:
            raise InvalidNameError("a policy needs at least one prefix")
        self.prefixes = tuple(sorted(self.normalize(names), key=str))

    @staticmethod
    def normalize(names):
        names = set(names)
        return {
            n for n in names if not any(m != n and m.is_prefix_of(n) for m in names)
        }

    @classmethod
    def parse(cls, s):
        """policy from a comma-separated list of prefixes"""
        if isinstance(s, PrefixPolicy):
            return s
        if isinstance(s, str):
            s = [p.strip() for p in s.split(',') if p.strip()]
        return cls(s)

    def __iter__(self):
        return iter(self.prefixes)

    def __len__(self):
        return len(self.prefixes)

    def __eq__(self, other):
        if not isinstance(other, PrefixPolicy):
            return NotImplemented
        return self.prefixes == other.prefixes

    def __hash__(self):
        return hash(self.prefixes)

    def __str__(self):
        return ','.join(str(p) for p in self.prefixes)

    def __repr__(self):
        return "PrefixPolicy(%r)" % [str(p) for p in self.prefixes]

    def matching(self, name):
        """policy prefixes satisfied by `name`, in branch order"""
        return [p for p in self.prefixes if p.is_prefix_of(name)]


PrefixKeyRing = namedtuple('PrefixKeyRing', ['name', 'keys'])
PrefixCiphertext = namedtuple('PrefixCiphertext', ['policy', 'branches'])
Branch = namedtuple('Branch', ['prefix', 'ct'])


def satisfies(name, policy):
    """Whether some prefix in `policy` is a whole-component prefix of `name`."""
    name = HierName.parse(name)
    return any(p.is_prefix_of(name) for p in PrefixPolicy.parse(policy))


def keyring_extract(master, name, entropy=None):
    """One IBE key per prefix of `name`, shortest first."""
    name = HierName.parse(name)
    keys = tuple(ibe_extract(master, p.encode(), entropy) for p in name.prefixes())
    return PrefixKeyRing(name, keys)


def pe_enc(mpk, policy, payload, entropy=None):
    """Encrypt `payload` once per policy prefix."""
    policy = PrefixPolicy.parse(policy)
    branches = tuple(
        Branch(p, ibe_encrypt(mpk, p.encode(), payload, entropy)) for p in policy
    )
    return PrefixCiphertext(policy, branches)


def pe_dec(ring, ct):
    """Decrypt the first branch whose prefix the ring's name extends.

    Raises NotAuthorized without touching any ciphertext if no branch
    matches, DecryptionFailed if the selected branch does not decrypt.
    """
    for branch in ct.branches:
        if branch.prefix.is_prefix_of(ring.name):
            key = ring.keys[len(branch.prefix) - 1]
            return ibe_decrypt(key, branch.ct)
    raise NotAuthorized("%s does not satisfy %s" % (ring.name, ct.policy))
