"""Canonical wire encodings.

Every persisted or transmitted object is a frame::

    "PDS1" || type (1 byte) || TLV body

Bodies are read strictly (see :mod:`privdisc.serialize.tlv`): fields appear
in one fixed order, unknown tags and trailing bytes are rejected. Lists are
preceded by their count, and optional fields are never last, so a frame cut
short at any byte is an error rather than a shorter valid object.
"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
from collections import namedtuple

from privdisc.crypto.dh import SHARE_BYTES
from privdisc.crypto.ibe import IbeCiphertext
from privdisc.crypto.ibe import IbeIdentityKey
from privdisc.crypto.ibe import MasterKeyPair
from privdisc.crypto.ibe import MasterPublicKey
from privdisc.crypto.ibe import MasterSecretKey
from privdisc.crypto.ibe import SIGMA_BYTES
from privdisc.crypto.pairing import load_group
from privdisc.crypto.prefix import Branch
from privdisc.crypto.prefix import HierName
from privdisc.crypto.prefix import PrefixCiphertext
from privdisc.crypto.prefix import PrefixKeyRing
from privdisc.crypto.prefix import PrefixPolicy
from privdisc.error import InvalidNameError
from privdisc.error import MalformedError
from privdisc.error import TruncatedError
from privdisc.error import UnknownVersionError
from privdisc.principals import Blessing
from privdisc.principals import PUBLIC_KEY_BYTES
from privdisc.principals import SigningKeyPair
from privdisc.principals import TrustAnchors
from privdisc.serialize import tlv

MAGIC = b'PDS1'
HEADER_BYTES = len(MAGIC) + 1

SID_BYTES = 16
BID_BYTES = 16
SCALAR_BYTES = 32
DIGEST_BYTES = 32
BEACON_HASH_BYTES = 8
TOKEN_BYTES = 16

# frame types
T_MPK = 0x01
T_MASTER_KEY = 0x02
T_IDENTITY_KEY = 0x03
T_IBE_CT = 0x04
T_BLESSING = 0x05
T_POLICY = 0x06
T_KEYRING = 0x07
T_PREFIX_CT = 0x08
T_BROADCAST = 0x09
T_SIGNING_KEY = 0x0A
T_PUBLIC_KEY = 0x0B
T_TRUST_ANCHORS = 0x0C
T_M1 = 0x10
T_M2 = 0x11
T_M3 = 0x12
T_F1 = 0x20
T_F2 = 0x21
T_APP_DATA = 0x30
T_BEACON = 0x40
T_ANNOUNCE = 0x41

FRAME_NAMES = {
    T_MPK: 'mpk',
    T_MASTER_KEY: 'master-key',
    T_IDENTITY_KEY: 'identity-key',
    T_IBE_CT: 'ibe-ciphertext',
    T_BLESSING: 'blessing',
    T_POLICY: 'policy',
    T_KEYRING: 'keyring',
    T_PREFIX_CT: 'prefix-ciphertext',
    T_BROADCAST: 'broadcast',
    T_SIGNING_KEY: 'signing-key',
    T_PUBLIC_KEY: 'public-key',
    T_TRUST_ANCHORS: 'trust-anchors',
    T_M1: 'M1',
    T_M2: 'M2',
    T_M3: 'M3',
    T_F1: 'F1',
    T_F2: 'F2',
    T_APP_DATA: 'app-data',
    T_BEACON: 'beacon',
    T_ANNOUNCE: 'announce',
}

# -----------------------------------------------------------------------------
# message types
# -----------------------------------------------------------------------------

M1 = namedtuple('M1', ['sid', 'gx'])
M2 = namedtuple('M2', ['sid', 'gy', 'c'])
M3 = namedtuple('M3', ['sid', 'c'])
F1 = namedtuple('F1', ['bid', 'sid', 'gx', 'c1', 'c2'])
F2 = namedtuple('F2', ['bid', 'sid', 'gy', 'c1', 'c2'])
Broadcast = namedtuple('Broadcast', ['bid', 'expiry', 'adv_ct'])
Broadcast.__doc__ = """A service advertisement.

``expiry`` is a cleartext echo for cheap pre-filtering; the copy signed
inside ``adv_ct`` is the authoritative one.
"""
AppData = namedtuple('AppData', ['sid', 'ct'])
Beacon = namedtuple('Beacon', ['digest'])
Announce = namedtuple('Announce', ['token'])
PublicKey = namedtuple('PublicKey', ['key'])


# -----------------------------------------------------------------------------
# frames
# -----------------------------------------------------------------------------


def frame(type_tag, body):
    return MAGIC + bytes([type_tag]) + body


def unframe(data, expect=None):
    """(type, body) of a frame, checking magic and (optionally) type"""
    data = bytes(data)
    if len(data) < HEADER_BYTES:
        raise TruncatedError("frame shorter than its header")
    magic = data[: len(MAGIC)]
    if magic != MAGIC:
        if magic[:3] == MAGIC[:3]:
            raise UnknownVersionError("unsupported frame version %r" % magic)
        raise MalformedError("bad frame magic %r" % magic)
    type_tag = data[len(MAGIC)]
    if type_tag not in FRAME_NAMES:
        raise MalformedError("unknown frame type 0x%02x" % type_tag)
    if expect is not None and type_tag != expect:
        raise MalformedError(
            "expected %s frame, got %s" % (FRAME_NAMES[expect], FRAME_NAMES[type_tag])
        )
    return type_tag, data[HEADER_BYTES:]


def frame_type(data):
    return unframe(data)[0]


def _scalar(n):
    return int(n).to_bytes(SCALAR_BYTES, 'big')


def _name(r, tag):
    try:
        return HierName.parse(r.str(tag))
    except InvalidNameError as e:
        raise MalformedError("%s: %s" % (r.what, e))


# -----------------------------------------------------------------------------
# IBE objects
# -----------------------------------------------------------------------------


def mpk_body(mpk):
    group = load_group(mpk.curve_id)
    return tlv.encode(
        (0x01, mpk.curve_id.encode('ascii')),
        (0x02, group.encode_g1(mpk.X)),
        (0x03, group.encode_g1(mpk.Y)),
        (0x04, group.encode_gt(mpk.v)),
    )


def parse_mpk(body):
    r = tlv.Reader(body, 'mpk')
    group = load_group(r.str(0x01))
    X = group.decode_g1(r.expect(0x02, group.g1_bytes))
    Y = group.decode_g1(r.expect(0x03, group.g1_bytes))
    v = r.expect(0x04, group.gt_bytes)
    r.done()
    # v is fixed by the group, so compare rather than re-validate
    if v != group.encode_gt(group.gt_generator):
        raise MalformedError("mpk: v is not e(g1, g2)")
    return MasterPublicKey(group.curve_id, X, Y, group.gt_generator)


def master_key_body(master):
    return tlv.encode(
        (0x01, mpk_body(master.mpk)),
        (0x02, _scalar(master.msk.x)),
        (0x03, _scalar(master.msk.y)),
    )


def parse_master_key(body):
    r = tlv.Reader(body, 'master key')
    mpk = parse_mpk(r.expect(0x01))
    x = r.uint(0x02, SCALAR_BYTES)
    y = r.uint(0x03, SCALAR_BYTES)
    r.done()
    group = load_group(mpk.curve_id)
    if not (0 < x < group.p and 0 < y < group.p):
        raise MalformedError("master key: scalar out of range")
    X, Y = group.g1_mul(group.g1, x), group.g1_mul(group.g1, y)
    if not (group.eq(X, mpk.X) and group.eq(Y, mpk.Y)):
        raise MalformedError("master key: secret does not match mpk")
    return MasterKeyPair(mpk, MasterSecretKey(mpk.curve_id, x, y))


def identity_key_body(key):
    group = load_group(key.mpk.curve_id)
    return tlv.encode(
        (0x01, key.identity),
        (0x02, _scalar(key.r)),
        (0x03, group.encode_g2(key.K)),
    )


def parse_identity_key(body, mpk):
    group = load_group(mpk.curve_id)
    r = tlv.Reader(body, 'identity key')
    identity = r.expect(0x01)
    k = r.uint(0x02, SCALAR_BYTES)
    K = group.decode_g2(r.expect(0x03, group.g2_bytes))
    r.done()
    if not identity:
        raise MalformedError("identity key: empty identity")
    if not 0 < k < group.p:
        raise MalformedError("identity key: scalar out of range")
    return IbeIdentityKey(identity, k, K, mpk)


def ibe_ct_body(ct):
    return tlv.encode(
        (0x01, ct.C1),
        (0x02, ct.C2),
        (0x03, ct.sym_ct),
        (0x04, ct.fo_seed_ct),
    )


def parse_ibe_ct(body):
    """Structural parse only; the group elements are checked on decryption."""
    r = tlv.Reader(body, 'IBE ciphertext')
    C1 = r.expect(0x01)
    C2 = r.expect(0x02)
    sym_ct = r.expect(0x03)
    fo_seed_ct = r.expect(0x04, SIGMA_BYTES)
    r.done()
    if len(C1) != len(C2) or not 32 <= len(C1) <= 64:
        raise MalformedError("IBE ciphertext: bad group element size")
    return IbeCiphertext(C1, C2, sym_ct, fo_seed_ct)


# -----------------------------------------------------------------------------
# prefix objects
# -----------------------------------------------------------------------------


def policy_body(policy):
    w = tlv.Writer()
    w.add_uint(0x01, len(policy), 2)
    for p in policy:
        w.add(0x02, p.encode())
    return w.getvalue()


def parse_policy(body):
    r = tlv.Reader(body, 'policy')
    count = r.uint(0x01, 2)
    names = []
    while r.peek_tag() == 0x02:
        names.append(_name(r, 0x02))
    r.done()
    if len(names) != count:
        raise TruncatedError("policy: %i of %i prefixes" % (len(names), count))
    if not names:
        raise MalformedError("policy: no prefixes")
    policy = PrefixPolicy(names)
    if list(policy.prefixes) != names:
        raise MalformedError("policy: not in canonical form")
    return policy


def keyring_body(ring):
    w = tlv.Writer()
    w.add(0x01, ring.name.encode())
    for key in ring.keys:
        w.add(0x02, identity_key_body(key))
    return w.getvalue()


def parse_keyring(body, mpk):
    r = tlv.Reader(body, 'keyring')
    name = _name(r, 0x01)
    keys = tuple(parse_identity_key(k, mpk) for k in r.repeated(0x02))
    r.done()
    if len(keys) != len(name):
        raise TruncatedError("keyring: %i keys for %i components" % (len(keys), len(name)))
    for key, prefix in zip(keys, name.prefixes()):
        if key.identity != prefix.encode():
            raise MalformedError("keyring: key for %r out of place" % key.identity)
    return PrefixKeyRing(name, keys)


def prefix_ct_body(ct):
    w = tlv.Writer()
    w.add(0x01, policy_body(ct.policy))
    for branch in ct.branches:
        w.add(0x02, tlv.encode((0x01, branch.prefix.encode()), (0x02, ibe_ct_body(branch.ct))))
    return w.getvalue()


def parse_prefix_ct(body):
    r = tlv.Reader(body, 'prefix ciphertext')
    policy = parse_policy(r.expect(0x01))
    branches = []
    for b in r.repeated(0x02):
        br = tlv.Reader(b, 'branch')
        prefix = _name(br, 0x01)
        ct = parse_ibe_ct(br.expect(0x02))
        br.done()
        branches.append(Branch(prefix, ct))
    r.done()
    if len(branches) != len(policy):
        raise TruncatedError("prefix ciphertext: %i of %i branches" % (len(branches), len(policy)))
    if tuple(b.prefix for b in branches) != policy.prefixes:
        raise MalformedError("prefix ciphertext: branches do not match policy")
    return PrefixCiphertext(policy, tuple(branches))


# -----------------------------------------------------------------------------
# messages
# -----------------------------------------------------------------------------


def broadcast_body(b):
    return tlv.encode(
        (0x01, b.bid),
        (0x02, tlv.uint_bytes(b.expiry, 8)),
        (0x03, prefix_ct_body(b.adv_ct)),
    )


def parse_broadcast(body):
    r = tlv.Reader(body, 'broadcast')
    bid = r.expect(0x01, BID_BYTES)
    expiry = r.uint(0x02, 8)
    adv_ct = parse_prefix_ct(r.expect(0x03))
    r.done()
    return Broadcast(bid, expiry, adv_ct)


def _m1_body(m):
    return tlv.encode((0x01, m.sid), (0x02, m.gx))


def _parse_m1(body):
    r = tlv.Reader(body, 'M1')
    m = M1(r.expect(0x01, SID_BYTES), r.expect(0x02, SHARE_BYTES))
    r.done()
    return m


def _m2_body(m):
    return tlv.encode((0x01, m.sid), (0x02, m.gy), (0x03, m.c))


def _parse_m2(body):
    r = tlv.Reader(body, 'M2')
    m = M2(r.expect(0x01, SID_BYTES), r.expect(0x02, SHARE_BYTES), r.expect(0x03))
    r.done()
    return m


def _m3_body(m):
    return tlv.encode((0x01, m.sid), (0x02, m.c))


def _parse_m3(body):
    r = tlv.Reader(body, 'M3')
    m = M3(r.expect(0x01, SID_BYTES), r.expect(0x02))
    r.done()
    return m


def _flight_body(m, share):
    # optional c2 goes before c1
    w = tlv.Writer()
    w.add(0x01, m.bid).add(0x02, m.sid).add(0x03, share)
    if m.c2 is not None:
        w.add(0x04, m.c2)
    w.add(0x05, m.c1)
    return w.getvalue()


def _parse_flight(body, cls):
    r = tlv.Reader(body, cls.__name__)
    bid = r.expect(0x01, BID_BYTES)
    sid = r.expect(0x02, SID_BYTES)
    share = r.expect(0x03, SHARE_BYTES)
    c2 = r.optional(0x04)
    c1 = r.expect(0x05)
    r.done()
    return cls(bid, sid, share, c1, c2)


def _app_data_body(m):
    return tlv.encode((0x01, m.sid), (0x02, m.ct))


def _parse_app_data(body):
    r = tlv.Reader(body, 'app data')
    m = AppData(r.expect(0x01, SID_BYTES), r.expect(0x02))
    r.done()
    return m


def _parse_single(body, what, cls, size):
    r = tlv.Reader(body, what)
    m = cls(r.expect(0x01, size))
    r.done()
    return m


def _parse_signing_key(body):
    r = tlv.Reader(body, 'signing key')
    keypair = SigningKeyPair.from_secret_bytes(r.expect(0x01, 32))
    r.done()
    return keypair


# -----------------------------------------------------------------------------
# public API
# -----------------------------------------------------------------------------

_encoders = [
    (MasterKeyPair, T_MASTER_KEY, master_key_body),
    (MasterPublicKey, T_MPK, mpk_body),
    (IbeIdentityKey, T_IDENTITY_KEY, identity_key_body),
    (IbeCiphertext, T_IBE_CT, ibe_ct_body),
    (Blessing, T_BLESSING, lambda b: b.encode()),
    (PrefixPolicy, T_POLICY, policy_body),
    (PrefixKeyRing, T_KEYRING, keyring_body),
    (PrefixCiphertext, T_PREFIX_CT, prefix_ct_body),
    (Broadcast, T_BROADCAST, broadcast_body),
    (SigningKeyPair, T_SIGNING_KEY, lambda k: tlv.encode((0x01, k.secret_bytes()))),
    (PublicKey, T_PUBLIC_KEY, lambda k: tlv.encode((0x01, k.key))),
    (TrustAnchors, T_TRUST_ANCHORS, lambda a: a.encode()),
    (M1, T_M1, _m1_body),
    (M2, T_M2, _m2_body),
    (M3, T_M3, _m3_body),
    (F1, T_F1, lambda m: _flight_body(m, m.gx)),
    (F2, T_F2, lambda m: _flight_body(m, m.gy)),
    (AppData, T_APP_DATA, _app_data_body),
    (Beacon, T_BEACON, lambda m: tlv.encode((0x01, m.digest))),
    (Announce, T_ANNOUNCE, lambda m: tlv.encode((0x01, m.token))),
]

_decoders = {
    T_MPK: parse_mpk,
    T_MASTER_KEY: parse_master_key,
    T_IBE_CT: parse_ibe_ct,
    T_BLESSING: Blessing.decode,
    T_POLICY: parse_policy,
    T_PREFIX_CT: parse_prefix_ct,
    T_BROADCAST: parse_broadcast,
    T_SIGNING_KEY: _parse_signing_key,
    T_PUBLIC_KEY: lambda body: _parse_single(body, 'public key', PublicKey, PUBLIC_KEY_BYTES),
    T_TRUST_ANCHORS: TrustAnchors.decode,
    T_M1: _parse_m1,
    T_M2: _parse_m2,
    T_M3: _parse_m3,
    T_F1: lambda body: _parse_flight(body, F1),
    T_F2: lambda body: _parse_flight(body, F2),
    T_APP_DATA: _parse_app_data,
    T_BEACON: lambda body: _parse_single(body, 'beacon', Beacon, BEACON_HASH_BYTES),
    T_ANNOUNCE: lambda body: _parse_single(body, 'announce', Announce, TOKEN_BYTES),
}

# these need the mpk they were extracted under
_keyed_decoders = {
    T_IDENTITY_KEY: parse_identity_key,
    T_KEYRING: parse_keyring,
}


def encode(obj):
    """The canonical frame for a wire object."""
    for cls, type_tag, body in _encoders:
        if isinstance(obj, cls):
            return frame(type_tag, body(obj))
    raise TypeError("no wire encoding for %r" % type(obj))


def decode(data, expect=None, mpk=None):
    """Decode a frame into its object.

    Parameters
    ----------
    data : bytes
    expect : int, optional
        required frame type (one of the ``T_*`` constants)
    mpk : MasterPublicKey, optional
        needed for identity keys and keyrings
    """
    type_tag, body = unframe(data, expect)
    if type_tag in _keyed_decoders:
        if mpk is None:
            raise ValueError("decoding a %s needs the mpk" % FRAME_NAMES[type_tag])
        parse = _keyed_decoders[type_tag]
        args = (body, mpk)
    else:
        parse = _decoders[type_tag]
        args = (body,)
    try:
        return parse(*args)
    except (ValueError, TypeError) as e:
        if isinstance(e, MalformedError):
            raise
        raise MalformedError("%s: %s" % (FRAME_NAMES[type_tag], e))


# -----------------------------------------------------------------------------
# size accounting
# -----------------------------------------------------------------------------


def prefix_ct_overhead(curve_id=None):
    """Bytes a PrefixCiphertext branch adds on top of the payload.

    Returns (per_branch, fixed): the encoded body of a PrefixCiphertext of
    a k-prefix policy with n-byte payload and prefixes totalling L bytes is
    ``fixed + k * (per_branch + n + 3) + 2 * L`` bytes. Each prefix appears
    twice, in the policy (with its own 3-byte header) and in its branch.
    """
    group = load_group(curve_id) if curve_id else load_group()
    ibe_ct = 4 * 3 + 2 * group.g1_bytes + 16 + SIGMA_BYTES
    # branch: prefix field header + ct field header + ibe body
    per_branch = 3 + 3 + ibe_ct + 3
    # policy field + count field
    fixed = 3 + 3 + 2
    return per_branch, fixed


def overhead_report(curve_id=None):
    """Measured sizes for the size budget table, as a list of (label, value)."""
    from privdisc.crypto.entropy import SeededEntropy
    from privdisc.crypto.ibe import ibe_setup
    from privdisc.crypto.prefix import pe_enc

    entropy = SeededEntropy('overhead-report')
    group = load_group(curve_id) if curve_id else load_group()
    master = ibe_setup(group, entropy)
    payload = bytes(100)
    one = len(encode(pe_enc(master.mpk, PrefixPolicy(['a']), payload, entropy)))
    two = len(encode(pe_enc(master.mpk, PrefixPolicy(['a', 'b']), payload, entropy)))
    per_branch, fixed = prefix_ct_overhead(group.curve_id)
    return [
        ('curve', group.curve_id),
        ('g1_bytes', group.g1_bytes),
        ('ibe_overhead', 2 * group.g1_bytes + 16 + SIGMA_BYTES),
        ('branch_overhead', per_branch),
        ('prefix_ct_1', one),
        ('prefix_ct_2', two),
        ('marginal_branch', two - one),
    ]
