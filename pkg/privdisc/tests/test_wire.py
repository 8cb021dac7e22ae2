"""test the canonical wire encodings and the advertisement framings"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
import pytest

from privdisc.crypto.dh import DHKeyPair
from privdisc.crypto.entropy import SeededEntropy
from privdisc.crypto.ibe import ibe_encrypt
from privdisc.crypto.prefix import keyring_extract
from privdisc.crypto.prefix import pe_enc
from privdisc.crypto.prefix import PrefixPolicy
from privdisc.error import MalformedError
from privdisc.error import OversizeError
from privdisc.error import TruncatedError
from privdisc.error import UnknownVersionError
from privdisc.principals import SigningKeyPair
from privdisc.protocol.discovery import make_broadcast
from privdisc.serialize import advert
from privdisc.serialize import tlv
from privdisc.serialize import wire

from .conftest import BOB
from .conftest import TV
from .conftest import TV_POLICY

NOW = 1700000000


@pytest.fixture(scope='module')
def broadcast(world):
    tv = world.principals[TV]
    b, _ = make_broadcast(
        tv, world.deployment, TV_POLICY, 3600, 1, now=NOW, entropy=SeededEntropy('wire-bcast')
    )
    return b


def sample_objects(world, broadcast, entropy):
    """one object of every frame kind, fresh where that is cheap"""
    tv = world.principals[TV]
    mpk = world.deployment.mpk
    name = 'dev.v.io/%s' % entropy.bytes(4).hex()
    ring = keyring_extract(world.idp.master, name, entropy)
    sid = entropy.bytes(wire.SID_BYTES)
    bid = entropy.bytes(wire.BID_BYTES)
    share = DHKeyPair.generate(entropy).share
    return [
        mpk,
        world.idp.master,
        ring.keys[-1],
        ibe_encrypt(mpk, name, entropy.bytes(20), entropy),
        tv.blessing,
        PrefixPolicy.parse('dev.v.io/u,%s' % name),
        ring,
        pe_enc(mpk, name, entropy.bytes(20), entropy),
        broadcast,
        SigningKeyPair.generate(entropy),
        wire.PublicKey(tv.public),
        world.deployment.anchors,
        wire.M1(sid, share),
        wire.M2(sid, share, entropy.bytes(40)),
        wire.M3(sid, entropy.bytes(40)),
        wire.F1(bid, sid, share, entropy.bytes(30), None),
        wire.F2(bid, sid, share, entropy.bytes(30), entropy.bytes(5)),
        wire.AppData(sid, entropy.bytes(25)),
        wire.Beacon(entropy.bytes(wire.BEACON_HASH_BYTES)),
        wire.Announce(entropy.bytes(wire.TOKEN_BYTES)),
    ]


def test_tlv_strict():
    body = tlv.encode((0x01, b'a'), (0x02, b'bc'))
    r = tlv.Reader(body)
    assert r.expect(0x01) == b'a'
    assert r.optional(0x03) is None
    assert r.expect(0x02, 2) == b'bc'
    r.done()
    # out of order
    r = tlv.Reader(body)
    with pytest.raises(MalformedError):
        r.expect(0x02)
    # trailing field
    r = tlv.Reader(body)
    r.expect(0x01)
    with pytest.raises(MalformedError):
        r.done()
    r = tlv.Reader(body[:-1])
    r.expect(0x01)
    with pytest.raises(TruncatedError):
        r.expect(0x02)
    with pytest.raises(OversizeError):
        tlv.field(0x01, bytes(tlv.MAX_VALUE + 1))


def test_frame_header():
    data = wire.encode(wire.Beacon(bytes(wire.BEACON_HASH_BYTES)))
    assert data[:4] == wire.MAGIC
    assert wire.frame_type(data) == wire.T_BEACON
    with pytest.raises(UnknownVersionError):
        wire.decode(b'PDS2' + data[4:])
    with pytest.raises(MalformedError):
        wire.decode(b'XXXX' + data[4:])
    with pytest.raises(TruncatedError):
        wire.decode(data[:3])
    with pytest.raises(MalformedError):
        wire.decode(data, expect=wire.T_ANNOUNCE)
    with pytest.raises(MalformedError):
        wire.decode(wire.MAGIC + b'\xee')
    with pytest.raises(TypeError):
        wire.encode(object())


def test_messages():
    entropy = SeededEntropy('messages')
    sid = entropy.bytes(wire.SID_BYTES)
    bid = entropy.bytes(wire.BID_BYTES)
    share = b'\x02' + entropy.bytes(32)
    for msg in [
        wire.M1(sid, share),
        wire.M2(sid, share, b'ciphertext'),
        wire.M3(sid, b'ciphertext'),
        wire.F1(bid, sid, share, b'c1', None),
        wire.F1(bid, sid, share, b'c1', b'c2'),
        wire.F2(bid, sid, share, b'c1', b'c2'),
        wire.AppData(sid, b'ct'),
        wire.Announce(entropy.bytes(wire.TOKEN_BYTES)),
    ]:
        assert wire.decode(wire.encode(msg)) == msg


def test_truncation(world, broadcast):
    """no proper prefix of a frame decodes"""
    entropy = SeededEntropy('truncation')
    f1 = wire.F1(
        entropy.bytes(wire.BID_BYTES),
        entropy.bytes(wire.SID_BYTES),
        b'\x03' + entropy.bytes(32),
        b'c1',
        b'early',
    )
    tv = world.principals[TV]
    frames = [f1, tv.blessing, world.deployment.anchors, broadcast]
    for data in map(wire.encode, frames):
        for n in range(len(data)):
            with pytest.raises(MalformedError):
                wire.decode(data[:n])


def test_trailing_bytes(broadcast):
    data = wire.encode(broadcast)
    assert wire.decode(data) == broadcast
    with pytest.raises(MalformedError):
        wire.decode(data + b'\x00')


def test_ibe_objects(world, group):
    mpk = world.deployment.mpk
    assert wire.decode(wire.encode(mpk)).X is not None
    assert wire.encode(wire.decode(wire.encode(mpk))) == wire.encode(mpk)
    master = world.idp.master
    assert wire.decode(wire.encode(master)).msk == master.msk
    ct = ibe_encrypt(mpk, 'a', b'x', SeededEntropy('ibe-object'))
    assert wire.decode(wire.encode(ct)) == ct


def test_keyring(world):
    tv = world.principals[TV]
    ring = list(tv.keyrings.values())[0]
    data = wire.encode(ring)
    with pytest.raises(ValueError):
        wire.decode(data)
    again = wire.decode(data, mpk=world.deployment.mpk)
    assert again.name == ring.name
    assert [k.identity for k in again.keys] == [k.identity for k in ring.keys]
    assert wire.encode(again) == data


def test_policy_canonical():
    policy = PrefixPolicy.parse('b,a')
    data = wire.encode(policy)
    assert wire.decode(data) == policy
    # hand-built body listing the prefixes out of order
    body = tlv.Writer().add_uint(0x01, 2, 2).add(0x02, b'b').add(0x02, b'a').getvalue()
    with pytest.raises(MalformedError):
        wire.decode(wire.frame(wire.T_POLICY, body))


def test_prefix_ct_overhead(world):
    per_branch, fixed = wire.prefix_ct_overhead()
    ct = pe_enc(world.deployment.mpk, 'ab,c', bytes(10), SeededEntropy('overhead'))
    body = wire.prefix_ct_body(ct)
    k, n, L = 2, 10, len('ab') + len('c')
    assert len(body) == fixed + k * (per_branch + n + 3) + 2 * L


def test_overhead_report():
    report = dict(wire.overhead_report('bls12_381'))
    assert report['curve'] == 'bls12_381'
    assert report['g1_bytes'] == 48
    per_branch, _ = wire.prefix_ct_overhead('bls12_381')
    assert report['marginal_branch'] == per_branch + 100 + 3 + 2 * len('b')


# -------------------------------------------------------------------------------
# advertisements
# -------------------------------------------------------------------------------


def test_mdns_txt(broadcast):
    data = wire.encode(broadcast)
    assert len(data) <= advert.ADVERT_BUDGET
    txt = advert.to_mdns_txt(broadcast)
    assert all(len(v) <= advert.CHUNK_CHARS for v in txt.values())
    assert sorted(txt) == ['p%i' % i for i in range(len(txt))]
    assert advert.from_mdns_txt(txt) == broadcast
    # zeroconf's own view of the record
    assert advert.from_mdns_txt(advert.txt_record(broadcast)) == broadcast


def test_mdns_txt_errors(broadcast):
    txt = advert.to_mdns_txt(broadcast)
    with pytest.raises(MalformedError):
        advert.from_mdns_txt({})
    gapped = dict(txt)
    gapped['p%i' % (len(txt) + 1)] = 'AAAA'
    with pytest.raises(MalformedError):
        advert.from_mdns_txt(gapped)
    with pytest.raises(MalformedError):
        advert.from_mdns_txt(dict(txt, extra='x'))
    with pytest.raises(MalformedError):
        advert.from_mdns_txt(dict(txt, p0='!!!!'))


def test_advert_budget(world):
    tv = world.principals[TV]
    policy = 'dev.v.io/g/a,dev.v.io/g/b'
    big, _ = make_broadcast(tv, world.deployment, policy, 60, 1, now=NOW, entropy=SeededEntropy(2))
    assert len(wire.encode(big)) > advert.ADVERT_BUDGET
    with pytest.raises(OversizeError):
        advert.to_mdns_txt(big)


def test_service_info(broadcast):
    info = advert.to_service_info(broadcast, port=4242, entropy=SeededEntropy('info'))
    assert info.type == advert.SERVICE_TYPE
    assert info.name.endswith('.' + advert.SERVICE_TYPE)
    assert info.port == 4242


def test_ble_pointer():
    record = advert.to_ble_pointer('192.168.1.20', 7000)
    assert len(record) == advert.BLE_RECORD_BYTES == 31
    assert advert.parse_ble_pointer(record) == ('192.168.1.20', 7000)
    assert advert.parse_ble_pointer(advert.to_ble_pointer('fe80::1', 1)) == ('fe80::1', 1)
    with pytest.raises(MalformedError):
        advert.parse_ble_pointer(record[:-1])
    with pytest.raises(MalformedError):
        advert.parse_ble_pointer(b'XX' + record[2:])
    with pytest.raises(MalformedError):
        advert.parse_ble_pointer(record[:-1] + b'\x01')
    with pytest.raises(ValueError):
        advert.to_ble_pointer('10.0.0.1', 70000)


# -------------------------------------------------------------------------------
# every frame kind
# -------------------------------------------------------------------------------


def test_every_kind_roundtrip(world, broadcast):
    mpk = world.deployment.mpk
    objects = sample_objects(world, broadcast, SeededEntropy('every-kind'))
    frames = [wire.encode(obj) for obj in objects]
    assert sorted(wire.frame_type(data) for data in frames) == sorted(wire.FRAME_NAMES)
    for data in frames:
        assert wire.encode(wire.decode(data, mpk=mpk)) == data


def test_three_certificate_blessing_size(world):
    bob = world.principals[BOB]
    assert len(bob.blessing) == 3
    assert len(bob.blessing.encode()) <= 600
    assert len(wire.encode(bob.blessing)) <= 600


@pytest.mark.slow
def test_random_roundtrips(world, broadcast):
    mpk = world.deployment.mpk
    entropy = SeededEntropy('random-roundtrips')
    count = 0
    while count < 1000:
        for obj in sample_objects(world, broadcast, entropy):
            data = wire.encode(obj)
            again = wire.decode(data, mpk=mpk)
            assert wire.encode(again) == data
            assert type(again) is type(obj)
            count += 1


@pytest.mark.slow
def test_truncation_every_kind(world, broadcast):
    mpk = world.deployment.mpk
    for obj in sample_objects(world, broadcast, SeededEntropy('truncate-every-kind')):
        data = wire.encode(obj)
        for n in range(len(data)):
            with pytest.raises(MalformedError):
                wire.decode(data[:n], mpk=mpk)
