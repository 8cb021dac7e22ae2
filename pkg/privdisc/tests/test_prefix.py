"""test hierarchical names, policies and prefix encryption"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
import pytest

from privdisc.crypto.entropy import SeededEntropy
from privdisc.crypto.ibe import ibe_setup
from privdisc.crypto.prefix import HierName
from privdisc.crypto.prefix import keyring_extract
from privdisc.crypto.prefix import MAX_COMPONENT_BYTES
from privdisc.crypto.prefix import MAX_COMPONENTS
from privdisc.crypto.prefix import pe_dec
from privdisc.crypto.prefix import pe_enc
from privdisc.crypto.prefix import PrefixPolicy
from privdisc.crypto.prefix import satisfies
from privdisc.error import DecryptionFailed
from privdisc.error import InvalidNameError
from privdisc.error import NotAuthorized

COMPONENTS = ['a', 'b', 'bc']

# -------------------------------------------------------------------------------
# Globals and Utilities
# -------------------------------------------------------------------------------


@pytest.fixture(scope='module')
def master(group):
    return ibe_setup(group, SeededEntropy('test-prefix-master'))


@pytest.fixture(scope='module')
def rings(master):
    entropy = SeededEntropy('test-prefix-rings')
    names = ['Alice/Family/Bob', 'Alice/Work', 'Alice2', 'Carol']
    return {name: keyring_extract(master, name, entropy) for name in names}


# -------------------------------------------------------------------------------
# Tests
# -------------------------------------------------------------------------------


def test_name_parse():
    name = HierName.parse('Alice/Family/Bob')
    assert len(name) == 3
    assert str(name) == 'Alice/Family/Bob'
    assert name.encode() == b'Alice/Family/Bob'
    assert HierName.parse(name.encode()) == name
    assert HierName.parse(name) is name
    assert name.truncate(1) == HierName(['Alice'])
    assert name.extend('TV') == HierName.parse('Alice/Family/Bob/TV')
    assert [str(p) for p in name.prefixes()] == ['Alice', 'Alice/Family', 'Alice/Family/Bob']


@pytest.mark.parametrize(
    'bad',
    [
        '',
        'Alice//Bob',
        'Alice/',
        '/'.join(['a'] * (MAX_COMPONENTS + 1)),
        'x' * (MAX_COMPONENT_BYTES + 1),
        b'\xff\xfe',
    ],
)
def test_name_invalid(bad):
    with pytest.raises(InvalidNameError):
        HierName.parse(bad)


def test_name_limits():
    assert len(HierName.parse('/'.join(['a'] * MAX_COMPONENTS))) == MAX_COMPONENTS
    assert HierName.parse('x' * MAX_COMPONENT_BYTES)


def test_prefix_is_whole_component():
    alice = HierName.parse('Alice')
    assert alice.is_prefix_of(HierName.parse('Alice'))
    assert alice.is_prefix_of(HierName.parse('Alice/Family'))
    assert not alice.is_prefix_of(HierName.parse('Alice2'))
    assert not alice.is_prefix_of(HierName.parse('Al'))
    assert not HierName.parse('Alice/Family').is_prefix_of(alice)


def test_policy_normalized():
    policy = PrefixPolicy.parse('Bob/TV, Alice/Family, Alice, Bob')
    assert [str(p) for p in policy] == ['Alice', 'Bob']
    assert str(policy) == 'Alice,Bob'
    assert policy == PrefixPolicy(['Bob', 'Alice'])
    assert PrefixPolicy.parse(policy) is policy
    assert hash(policy) == hash(PrefixPolicy.parse('Alice,Bob'))
    with pytest.raises(InvalidNameError):
        PrefixPolicy.parse('')
    with pytest.raises(InvalidNameError):
        PrefixPolicy.parse(' , ')


def test_policy_matching():
    policy = PrefixPolicy.parse('Alice/Family,Carol')
    assert policy.matching(HierName.parse('Alice/Family/Bob')) == [HierName.parse('Alice/Family')]
    assert policy.matching(HierName.parse('Alice/Work')) == []


@pytest.mark.parametrize(
    'name, policy, expected',
    [
        ('Alice/Family/Bob', 'Alice', True),
        ('Alice/Family/Bob', 'Alice/Family/Bob', True),
        ('Alice/Family/Bob', 'Alice/Work,Alice/Family', True),
        ('Alice/Family', 'Alice/Family/Bob', False),
        ('Alice2', 'Alice', False),
        ('Carol', 'Alice,Bob', False),
    ],
)
def test_satisfies(name, policy, expected):
    assert satisfies(name, policy) is expected


def test_keyring_shortest_first(rings):
    ring = rings['Alice/Family/Bob']
    assert [k.identity for k in ring.keys] == [b'Alice', b'Alice/Family', b'Alice/Family/Bob']


def test_pe_roundtrip(master, rings):
    ct = pe_enc(master.mpk, 'Alice/Work,Alice/Family', b'family secret', SeededEntropy('rt'))
    assert [str(b.prefix) for b in ct.branches] == ['Alice/Family', 'Alice/Work']
    assert pe_dec(rings['Alice/Family/Bob'], ct) == b'family secret'
    assert pe_dec(rings['Alice/Work'], ct) == b'family secret'


def test_pe_not_authorized(master, rings):
    ct = pe_enc(master.mpk, 'Alice', b'for Alice', SeededEntropy('na'))
    # a string prefix is not a name prefix
    with pytest.raises(NotAuthorized):
        pe_dec(rings['Alice2'], ct)
    with pytest.raises(NotAuthorized):
        pe_dec(rings['Carol'], ct)


def test_pe_tampered_branch(master, rings):
    ct = pe_enc(master.mpk, 'Alice', b'payload', SeededEntropy('tamper'))
    branch = ct.branches[0]
    sym_ct = bytearray(branch.ct.sym_ct)
    sym_ct[0] ^= 0x80
    bad = branch._replace(ct=branch.ct._replace(sym_ct=bytes(sym_ct)))
    with pytest.raises(DecryptionFailed):
        pe_dec(rings['Alice/Work'], ct._replace(branches=(bad,)))


def test_pe_matches_satisfies(master, rings):
    """decryption succeeds exactly when the name satisfies the policy"""
    entropy = SeededEntropy('oracle')
    for policy in ['Alice/Family', 'Alice2,Carol']:
        ct = pe_enc(master.mpk, policy, b'oracle', entropy)
        for name, ring in rings.items():
            try:
                opened = pe_dec(ring, ct) == b'oracle'
            except NotAuthorized:
                opened = False
            assert opened is satisfies(name, policy), (name, policy)


# -------------------------------------------------------------------------------
# against a component-by-component reference matcher
# -------------------------------------------------------------------------------


def reference_match(name, policy):
    """whether any prefix in `policy` equals the leading components of `name`"""
    components = name.split('/')
    for prefix in policy:
        wanted = prefix.split('/')
        if len(wanted) <= len(components) and components[: len(wanted)] == wanted:
            return True
    return False


def random_name(entropy, depth=5):
    n = entropy.scalar(depth + 1)
    return '/'.join(COMPONENTS[entropy.scalar(len(COMPONENTS) + 1) - 1] for _ in range(n))


def random_pairs(seed, count):
    entropy = SeededEntropy(seed)
    for _ in range(count):
        policy = [random_name(entropy, 3) for _ in range(entropy.scalar(4))]
        yield random_name(entropy), policy


@pytest.mark.parametrize(
    'name, policy, expected',
    [
        ('a/bc', ['a/b'], False),
        ('a/b', ['a/bc'], False),
        ('a/b/c', ['a/b'], True),
        ('ab', ['a'], False),
        ('a', ['a/b'], False),
        ('a/b', [], False),
    ],
)
def test_reference_match_edges(name, policy, expected):
    assert reference_match(name, policy) is expected
    if policy:
        assert satisfies(name, policy) is expected


def test_empty_policy(master):
    with pytest.raises(InvalidNameError):
        satisfies('a/b', [])
    with pytest.raises(InvalidNameError):
        pe_enc(master.mpk, [], b'nobody')


def test_satisfies_matches_reference():
    for name, policy in random_pairs('satisfies-reference', 1000):
        assert satisfies(name, policy) is reference_match(name, policy), (name, policy)


@pytest.mark.slow
def test_pe_matches_reference(master):
    entropy = SeededEntropy('pe-reference')
    rings = {}
    cts = {}
    for name, policy in random_pairs('pe-reference-pairs', 1000):
        if name not in rings:
            rings[name] = keyring_extract(master, name, entropy)
        key = str(PrefixPolicy.parse(policy))
        if key not in cts:
            cts[key] = pe_enc(master.mpk, key, b'reference', entropy)
        try:
            opened = pe_dec(rings[name], cts[key]) == b'reference'
        except NotAuthorized:
            opened = False
        assert opened is reference_match(name, policy), (name, policy)
