"""CCA-secure identity-based encryption.

The "BB2" scheme, made CCA-secure and hybrid with the
Fujisaki-Okamoto transform:

Setup
    x, y random; mpk = (X = g1^x, Y = g1^y, v = e(g1, g2)); msk = (x, y)
Extract(id)
    r random with x + H(id) + r*y != 0; K = g2^(1 / (x + H(id) + r*y))
Encrypt(id, m)
    sigma random (32 bytes); s = H3(sigma || m);
    C1 = (X * g1^H(id))^s; C2 = Y^s;
    fo_seed_ct = sigma XOR H4(v^s); sym_ct = AEAD(H5(sigma), 0-nonce, m)
Decrypt
    v^s = e(C1 * C2^r, K); unmask sigma; open sym_ct; recompute s and
    (C1, C2) and require them to equal the received elements.

Every decryption failure, whatever its cause, raises the same
:class:`~privdisc.error.DecryptionFailed`.
"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
from collections import namedtuple

from privdisc.crypto import aead
from privdisc.crypto.entropy import resolve
from privdisc.crypto.kdf import hash_to_int
from privdisc.crypto.kdf import tagged_hash
from privdisc.crypto.kdf import TAG_FO_KEY
from privdisc.crypto.kdf import TAG_FO_MASK
from privdisc.crypto.kdf import TAG_FO_SCALAR
from privdisc.crypto.kdf import TAG_ID
from privdisc.crypto.pairing import DEFAULT_CURVE
from privdisc.crypto.pairing import load_group
from privdisc.error import DecryptionFailed
from privdisc.error import DegenerateKeyError
from privdisc.error import InvalidNameError
from privdisc.error import OversizeError
from privdisc.error import PrivDiscError

SIGMA_BYTES = 32
MAX_PLAINTEXT = 2 ** 16 - 1
EXTRACT_RETRIES = 8

MasterPublicKey = namedtuple('MasterPublicKey', ['curve_id', 'X', 'Y', 'v'])
MasterSecretKey = namedtuple('MasterSecretKey', ['curve_id', 'x', 'y'])
IbeCiphertext = namedtuple('IbeCiphertext', ['C1', 'C2', 'sym_ct', 'fo_seed_ct'])
IbeCiphertext.__doc__ = """IBE ciphertext.

C1 and C2 are kept in their compressed encodings, so equal ciphertexts
compare equal.
"""


class MasterKeyPair(namedtuple('MasterKeyPair', ['mpk', 'msk'])):
    def public(self):
        return self.mpk


class IbeIdentityKey(namedtuple('IbeIdentityKey', ['identity', 'r', 'K', 'mpk'])):
    """Secret key for one identity.

    Carries the (public) mpk it was extracted under, which decryption needs
    for the re-encryption check.
    """


def _xor(a, b):
    return bytes(i ^ j for i, j in zip(a, b))


def _as_bytes(identity):
    if isinstance(identity, str):
        identity = identity.encode('utf8')
    return bytes(identity)


def hash_to_scalar(identity, order=None):
    """Map an identity to Z_p (p the group order, BLS12-381 by default)."""
    if order is None:
        order = load_group(DEFAULT_CURVE).p
    return hash_to_int(TAG_ID, _as_bytes(identity), order)


def fo_scalar(sigma, plaintext, order):
    """s = H3(sigma || plaintext), in [1, p-1]"""
    return hash_to_int(TAG_FO_SCALAR, bytes(sigma) + bytes(plaintext), order - 1) + 1


def _fo_mask(group, vs):
    return tagged_hash(TAG_FO_MASK, group.encode_gt(vs))


def _fo_key(sigma):
    return tagged_hash(TAG_FO_KEY, sigma)


def ibe_setup(params=None, entropy=None):
    """Generate a MasterKeyPair in `params` (default curve if None)."""
    group = params or load_group()
    entropy = resolve(entropy)
    x = entropy.scalar(group.p)
    y = entropy.scalar(group.p)
    mpk = MasterPublicKey(
        group.curve_id, group.g1_mul(group.g1, x), group.g1_mul(group.g1, y), group.gt_generator
    )
    return MasterKeyPair(mpk, MasterSecretKey(group.curve_id, x, y))


def ibe_extract(master, identity, entropy=None):
    """Extract the key for `identity` from a MasterKeyPair.

    r is resampled while the denominator is zero, at most 8 times.
    """
    identity = _as_bytes(identity)
    if not identity:
        raise InvalidNameError("identity must be non-empty")
    msk = master.msk
    group = load_group(msk.curve_id)
    entropy = resolve(entropy)
    h = hash_to_scalar(identity, group.p)
    for _ in range(EXTRACT_RETRIES):
        r = entropy.scalar(group.p)
        d = (msk.x + h + r * msk.y) % group.p
        if d:
            K = group.g2_mul(group.g2, pow(d, -1, group.p))
            return IbeIdentityKey(identity, r, K, master.mpk)
    raise DegenerateKeyError(
        "zero denominator after %i attempts for %r" % (EXTRACT_RETRIES, identity)
    )


def _c1_c2(group, mpk, identity, s):
    h = hash_to_scalar(identity, group.p)
    base = group.add(mpk.X, group.g1_mul(group.g1, h))
    return group.g1_mul(base, s), group.g1_mul(mpk.Y, s)


def ibe_encrypt(mpk, identity, plaintext, entropy=None, sigma=None):
    """Encrypt `plaintext` to `identity`.

    `sigma` fixes the FO seed, which makes encryption deterministic.
    """
    plaintext = bytes(plaintext)
    if len(plaintext) > MAX_PLAINTEXT:
        raise OversizeError(
            "IBE plaintext of %i bytes exceeds %i" % (len(plaintext), MAX_PLAINTEXT)
        )
    group = load_group(mpk.curve_id)
    if sigma is None:
        sigma = resolve(entropy).bytes(SIGMA_BYTES)
    elif len(sigma) != SIGMA_BYTES:
        raise ValueError("sigma must be %i bytes" % SIGMA_BYTES)
    s = fo_scalar(sigma, plaintext, group.p)
    C1, C2 = _c1_c2(group, mpk, _as_bytes(identity), s)
    fo_seed_ct = _xor(sigma, _fo_mask(group, group.gt_pow(mpk.v, s)))
    sym_ct = aead.seal(_fo_key(sigma), aead.ZERO_NONCE, plaintext)
    return IbeCiphertext(group.encode_g1(C1), group.encode_g1(C2), sym_ct, fo_seed_ct)


def ibe_decrypt(key, ct):
    """Decrypt `ct` with an identity key; DecryptionFailed on any error."""
    mpk = key.mpk
    group = load_group(mpk.curve_id)
    try:
        if len(ct.fo_seed_ct) != SIGMA_BYTES:
            raise DecryptionFailed()
        C1 = group.decode_g1(ct.C1)
        C2 = group.decode_g1(ct.C2)
        vs = group.pair(group.add(C1, group.g1_mul(C2, key.r)), key.K)
        sigma = _xor(ct.fo_seed_ct, _fo_mask(group, vs))
        plaintext = aead.open_(_fo_key(sigma), aead.ZERO_NONCE, ct.sym_ct)
        s = fo_scalar(sigma, plaintext, group.p)
        C1x, C2x = _c1_c2(group, mpk, key.identity, s)
        if group.encode_g1(C1x) != bytes(ct.C1) or group.encode_g1(C2x) != bytes(ct.C2):
            raise DecryptionFailed()
    except (PrivDiscError, ValueError, TypeError):
        raise DecryptionFailed() from None
    return plaintext
