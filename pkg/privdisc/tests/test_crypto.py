"""test the pairing groups, IBE and the symmetric primitives"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
import hashlib
import hmac
from unittest import mock

import pytest

from privdisc.apps import bench
from privdisc.crypto import aead
from privdisc.crypto import dh
from privdisc.crypto.entropy import SeededEntropy
from privdisc.crypto.entropy import SystemEntropy
from privdisc.crypto.ibe import fo_scalar
from privdisc.crypto.ibe import hash_to_scalar
from privdisc.crypto.ibe import ibe_decrypt
from privdisc.crypto.ibe import ibe_encrypt
from privdisc.crypto.ibe import ibe_extract
from privdisc.crypto.ibe import ibe_setup
from privdisc.crypto.ibe import MAX_PLAINTEXT
from privdisc.crypto.ibe import SIGMA_BYTES
from privdisc.crypto.kdf import kdf_sigma
from privdisc.crypto.kdf import key_schedule_0rtt
from privdisc.crypto.pairing import CURVES
from privdisc.crypto.pairing import DEFAULT_CURVE
from privdisc.crypto.pairing import HAVE_NATIVE
from privdisc.crypto.pairing import load_group
from privdisc.error import CounterOverflow
from privdisc.error import DecryptionFailed
from privdisc.error import EntropyError
from privdisc.error import InvalidNameError
from privdisc.error import MalformedError
from privdisc.error import OversizeError

# -------------------------------------------------------------------------------
# Globals and Utilities
# -------------------------------------------------------------------------------

IDENTITY = 'dev.v.io/u/Alice/Devices/TV'


@pytest.fixture(scope='module')
def master(group):
    return ibe_setup(group, SeededEntropy('test-crypto-master'))


@pytest.fixture(scope='module')
def tv_key(master):
    return ibe_extract(master, IDENTITY, SeededEntropy('test-crypto-key'))


def flip(data, i=-1, bit=0):
    data = bytearray(data)
    data[i] ^= 1 << bit
    return bytes(data)


def sha256(*parts):
    return hashlib.sha256(b''.join(parts)).digest()


def wide_hash_mod(tag, data, order):
    wide = sha256(tag, b'\x00', data) + sha256(tag, b'\x01', data)
    return int.from_bytes(wide, 'big') % order


def hkdf_expand(key, info, length):
    out = t = b''
    counter = 1
    while len(out) < length:
        t = hmac.new(key, t + info + bytes([counter]), hashlib.sha256).digest()
        out += t
        counter += 1
    return out[:length]


def random_name(entropy):
    depth = entropy.scalar(4)
    return '/'.join(['dev.v.io'] + [entropy.bytes(3).hex() for _ in range(depth)])


native = pytest.mark.skipif(not HAVE_NATIVE, reason='charm-crypto not installed')


# -------------------------------------------------------------------------------
# Tests
# -------------------------------------------------------------------------------


def test_unknown_curve():
    with pytest.raises(MalformedError):
        load_group('p256')
    assert set(CURVES) == {'bls12_381', 'bn254', 'pbc_bn254'}
    assert DEFAULT_CURVE == ('pbc_bn254' if HAVE_NATIVE else 'bls12_381')


def test_bilinear(group):
    entropy = SeededEntropy('bilinear')
    a = entropy.scalar(group.p)
    b = entropy.scalar(group.p)
    lhs = group.pair(group.g1_mul(group.g1, a), group.g2_mul(group.g2, b))
    rhs = group.gt_pow(group.gt_generator, a * b)
    assert group.encode_gt(lhs) == group.encode_gt(rhs)


def test_point_encodings(group):
    entropy = SeededEntropy('encodings')
    P = group.g1_mul(group.g1, entropy.scalar(group.p))
    Q = group.g2_mul(group.g2, entropy.scalar(group.p))
    data = group.encode_g1(P)
    assert len(data) == group.g1_bytes
    assert group.eq(group.decode_g1(data), P)
    data = group.encode_g2(Q)
    assert len(data) == group.g2_bytes
    assert group.eq(group.decode_g2(data), Q)
    with pytest.raises(MalformedError):
        group.decode_g1(data)
    with pytest.raises(MalformedError):
        group.decode_g1(bytes(group.g1_bytes - 1))


def test_gt_encoding(group):
    data = group.encode_gt(group.gt_generator)
    assert len(data) == group.gt_bytes
    assert group.encode_gt(group.decode_gt(data)) == data
    with pytest.raises(MalformedError):
        group.decode_gt(data[:-1])


def test_ibe_roundtrip(master, tv_key):
    entropy = SeededEntropy('roundtrip')
    for message in [b'', b'hello', bytes(range(256))]:
        ct = ibe_encrypt(master.mpk, IDENTITY, message, entropy)
        assert ibe_decrypt(tv_key, ct) == message


def test_ibe_bytes_identity(master, tv_key):
    ct = ibe_encrypt(master.mpk, IDENTITY.encode('utf8'), b'same identity', SeededEntropy(1))
    assert ibe_decrypt(tv_key, ct) == b'same identity'


def test_ibe_wrong_identity(master):
    entropy = SeededEntropy('wrong-identity')
    other = ibe_extract(master, 'dev.v.io/u/Bob', entropy)
    ct = ibe_encrypt(master.mpk, IDENTITY, b'for the TV only', entropy)
    with pytest.raises(DecryptionFailed):
        ibe_decrypt(other, ct)


def test_ibe_tampering(master, tv_key):
    ct = ibe_encrypt(master.mpk, IDENTITY, b'untouched', SeededEntropy('tamper'))
    for field in ct._fields:
        tampered = ct._replace(**{field: flip(getattr(ct, field))})
        with pytest.raises(DecryptionFailed):
            ibe_decrypt(tv_key, tampered)


def test_ibe_fixed_sigma(master):
    sigma = bytes(range(SIGMA_BYTES))
    a = ibe_encrypt(master.mpk, IDENTITY, b'msg', sigma=sigma)
    b = ibe_encrypt(master.mpk, IDENTITY, b'msg', sigma=sigma)
    assert a == b
    c = ibe_encrypt(master.mpk, IDENTITY, b'msg', SeededEntropy('fresh'))
    assert c != a
    with pytest.raises(ValueError):
        ibe_encrypt(master.mpk, IDENTITY, b'msg', sigma=b'short')


def test_ibe_limits(master):
    with pytest.raises(InvalidNameError):
        ibe_extract(master, '')
    with pytest.raises(OversizeError):
        ibe_encrypt(master.mpk, IDENTITY, bytes(MAX_PLAINTEXT + 1))


def test_ibe_bn254():
    group = load_group('bn254')
    entropy = SeededEntropy('bn254')
    master = ibe_setup(group, entropy)
    key = ibe_extract(master, IDENTITY, entropy)
    ct = ibe_encrypt(master.mpk, IDENTITY, b'bn curve', entropy)
    assert len(ct.C1) == group.g1_bytes == 32
    assert ibe_decrypt(key, ct) == b'bn curve'
    P = group.g1_mul(group.g1, entropy.scalar(group.p))
    assert group.eq(group.decode_g1(group.encode_g1(P)), P)
    Q = group.g2_mul(group.g2, entropy.scalar(group.p))
    assert group.eq(group.decode_g2(group.encode_g2(Q)), Q)


def test_seeded_entropy():
    a = SeededEntropy('seed')
    b = SeededEntropy('seed')
    assert a.bytes(40) == b.bytes(40)
    assert a.fork('x').bytes(16) == b.fork('x').bytes(16)
    assert SeededEntropy('seed').fork('x').bytes(16) != SeededEntropy('seed').fork('y').bytes(16)
    for _ in range(20):
        assert 1 <= a.scalar(7) <= 6


def test_system_entropy():
    entropy = SystemEntropy()
    assert len(entropy.bytes(16)) == 16
    assert entropy.fork('child') is entropy
    with mock.patch('os.urandom', side_effect=NotImplementedError('no source')):
        with pytest.raises(EntropyError):
            entropy.bytes(16)


def test_hash_to_scalar(group):
    a = hash_to_scalar(IDENTITY)
    assert 0 < a < group.p
    assert hash_to_scalar(IDENTITY.encode('utf8')) == a
    assert hash_to_scalar(IDENTITY + '/x') != a
    assert 0 <= hash_to_scalar(IDENTITY, 97) < 97


def test_aead_channel():
    key = bytes(range(32))
    client = aead.Channel(key, aead.CLIENT_DIRECTION, aead.SERVER_DIRECTION)
    server = aead.Channel(key, aead.SERVER_DIRECTION, aead.CLIENT_DIRECTION)
    first = client.seal(b'one')
    second = client.seal(b'two')
    assert server.open(first) == b'one'
    assert server.open(second) == b'two'
    # the server's receive counter has moved past the first nonce
    with pytest.raises(DecryptionFailed):
        server.open(first)


def test_aead_nonces():
    assert aead.direction_nonce(aead.CLIENT_DIRECTION, 1) == b'clnt' + bytes(7) + b'\x01'
    with pytest.raises(CounterOverflow):
        aead.direction_nonce(aead.CLIENT_DIRECTION, 2 ** 64)
    with pytest.raises(ValueError):
        aead.direction_nonce(b'abc', 0)


def test_dh_exchange():
    entropy = SeededEntropy('dh')
    x = dh.DHKeyPair.generate(entropy)
    y = dh.DHKeyPair.generate(entropy)
    assert len(x.share) == dh.SHARE_BYTES
    assert x.exchange(y.share) == y.exchange(x.share)
    assert dh.exchange(x.exponent, y.share) == x.exchange(y.share)
    x.erase()
    assert x.erased and x.exponent is None
    with pytest.raises(ValueError):
        x.exchange(y.share)
    with pytest.raises(MalformedError):
        dh.validate_share(b'\x05' + bytes(32))


def test_kdf_sigma():
    keys = kdf_sigma(b'gx', b'gy', b'gxy')
    assert keys == kdf_sigma(b'gx', b'gy', b'gxy')
    assert keys.htk != keys.atk
    assert kdf_sigma(b'gy', b'gx', b'gxy') != keys
    assert len(keys.htk) == len(keys.atk) == 32


def test_key_schedule_0rtt():
    entropy = SeededEntropy('schedule')
    s = dh.DHKeyPair.generate(entropy)
    x = dh.DHKeyPair.generate(entropy)
    keys = key_schedule_0rtt(s.share, x.share, x.exchange(s.share))
    assert keys == key_schedule_0rtt(s.share, x.share, s.exchange(x.share))
    assert len(set(keys)) == 4
    assert all(len(k) == 32 for k in keys)


def test_hash_to_scalar_vectors(group):
    for identity in [b'', b'\x00', b'dev.v.io', IDENTITY.encode('utf8')]:
        assert hash_to_scalar(identity, group.p) == wide_hash_mod(b'\x01', identity, group.p)
    assert hash_to_scalar('', group.p) != hash_to_scalar('\x00', group.p)


def test_kdf_sigma_vectors():
    gx, gy, gxy = b'\x11' * 32, b'\x22' * 32, b'\x33' * 32
    keys = kdf_sigma(gx, gy, gxy)
    assert keys.htk == sha256(b'\x10', gx, gy, gxy)
    assert keys.atk == sha256(b'\x11', gx, gy, gxy)


def test_key_schedule_0rtt_vectors():
    gs, gx, gsx = b'\x44' * 32, b'\x55' * 32, b'\x66' * 32
    out = hkdf_expand(sha256(b'\x20', gs, gx, gsx), b'privdisc 0rtt', 128)
    keys = key_schedule_0rtt(gs, gx, gsx)
    assert keys == (out[:32], out[32:64], out[64:96], out[96:])


# -------------------------------------------------------------------------------
# IBE properties
# -------------------------------------------------------------------------------


def test_fo_reencryption(group, master):
    sigma = bytes(range(SIGMA_BYTES))
    message = b'recomputable'
    ct = ibe_encrypt(master.mpk, IDENTITY, message, sigma=sigma)
    mpk = master.mpk
    s = wide_hash_mod(b'\x03', sigma + message, group.p - 1) + 1
    assert fo_scalar(sigma, message, group.p) == s
    h = wide_hash_mod(b'\x01', IDENTITY.encode('utf8'), group.p)
    C1 = group.g1_mul(group.add(mpk.X, group.g1_mul(group.g1, h)), s)
    C2 = group.g1_mul(mpk.Y, s)
    assert ct.C1 == group.encode_g1(C1)
    assert ct.C2 == group.encode_g1(C2)
    mask = sha256(b'\x04', group.encode_gt(group.gt_pow(mpk.v, s)))
    assert ct.fo_seed_ct == bytes(a ^ b for a, b in zip(sigma, mask))


def test_pairing_identity(group, master, tv_key):
    sigma = b'\x07' * SIGMA_BYTES
    ct = ibe_encrypt(master.mpk, IDENTITY, b'pairing', sigma=sigma)
    s = fo_scalar(sigma, b'pairing', group.p)
    C1 = group.decode_g1(ct.C1)
    C2 = group.decode_g1(ct.C2)
    lhs = group.pair(group.add(C1, group.g1_mul(C2, tv_key.r)), tv_key.K)
    assert group.encode_gt(lhs) == group.encode_gt(group.gt_pow(master.mpk.v, s))


def test_key_rerandomization(group, master, tv_key):
    other = ibe_extract(master, IDENTITY, SeededEntropy('another r'))
    assert other.r != tv_key.r
    assert group.encode_g2(other.K) != group.encode_g2(tv_key.K)
    ct = ibe_encrypt(master.mpk, IDENTITY, b'either key', SeededEntropy('rerandomize'))
    assert ibe_decrypt(tv_key, ct) == ibe_decrypt(other, ct) == b'either key'


@pytest.mark.slow
def test_many_roundtrips(master):
    entropy = SeededEntropy('many-roundtrips')
    for i in range(500):
        name = random_name(entropy)
        key = ibe_extract(master, name, entropy)
        message = entropy.bytes(i % 64)
        assert ibe_decrypt(key, ibe_encrypt(master.mpk, name, message, entropy)) == message


@pytest.mark.slow
def test_many_wrong_identities(master):
    entropy = SeededEntropy('many-wrong-identities')
    for _ in range(500):
        name = random_name(entropy)
        other = name + '/x'
        key = ibe_extract(master, other, entropy)
        ct = ibe_encrypt(master.mpk, name, b'not for you', entropy)
        with pytest.raises(DecryptionFailed):
            ibe_decrypt(key, ct)


@pytest.mark.slow
def test_many_bit_flips(master, tv_key):
    entropy = SeededEntropy('many-bit-flips')
    ct = ibe_encrypt(master.mpk, IDENTITY, b'every bit counts', entropy)
    for _ in range(1000):
        field = ct._fields[entropy.scalar(len(ct._fields) + 1) - 1]
        value = getattr(ct, field)
        i = entropy.scalar(len(value) + 1) - 1
        bit = entropy.scalar(9) - 1
        with pytest.raises(DecryptionFailed):
            ibe_decrypt(tv_key, ct._replace(**{field: flip(value, i, bit)}))


@pytest.mark.slow
def test_ibe_cost_ordering(group):
    rows = dict(bench.bench_ibe(group, iterations=5))
    assert rows['Decrypt'] > rows['Encrypt'] > rows['Extract']


# -------------------------------------------------------------------------------
# native backend
# -------------------------------------------------------------------------------


@native
def test_native_ibe():
    group = load_group('pbc_bn254')
    entropy = SeededEntropy('native')
    master = ibe_setup(group, entropy)
    key = ibe_extract(master, IDENTITY, entropy)
    ct = ibe_encrypt(master.mpk, IDENTITY, b'in C', entropy)
    assert len(ct.C1) == group.g1_bytes
    assert ibe_decrypt(key, ct) == b'in C'
    with pytest.raises(DecryptionFailed):
        ibe_decrypt(key, ct._replace(C2=flip(ct.C2)))


@native
def test_native_encodings():
    group = load_group('pbc_bn254')
    entropy = SeededEntropy('native-encodings')
    P = group.g1_mul(group.g1, entropy.scalar(group.p))
    Q = group.g2_mul(group.g2, entropy.scalar(group.p))
    assert group.eq(group.decode_g1(group.encode_g1(P)), P)
    assert group.eq(group.decode_g2(group.encode_g2(Q)), Q)
    data = group.encode_gt(group.gt_generator)
    assert group.encode_gt(group.decode_gt(data)) == data
    assert group.is_identity(group.g1_mul(P, group.p))
    with pytest.raises(MalformedError):
        group.decode_g1(group.encode_g2(Q))


@pytest.mark.skipif(HAVE_NATIVE, reason="charm-crypto installed")
def test_native_missing():
    with pytest.raises(MalformedError):
        load_group('pbc_bn254')
