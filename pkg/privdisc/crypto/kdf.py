"""Hashes and key derivation.

All hashes are SHA-256 with a one-byte domain tag in front of the input.
Tags in use:

====  =========================================================
0x01  identity -> scalar (IBE)
0x03  FO scalar from (sigma, plaintext)
0x04  FO seed mask
0x05  FO symmetric key
0x10  handshake traffic key (SIGMA)
0x11  application traffic key (SIGMA)
0x20  0-RTT seed from (g^s, g^x, g^sx)
0x21  0-RTT extractor input from (g^x, g^y, g^xy)
0x30  blessing digest
0x31  parent-chain digest
0x32  signed-message digest
====  =========================================================
"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
import hashlib
from collections import namedtuple

from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives import hmac as crypto_hmac
from cryptography.hazmat.primitives.kdf.hkdf import HKDFExpand

TAG_ID = b'\x01'
TAG_FO_SCALAR = b'\x03'
TAG_FO_MASK = b'\x04'
TAG_FO_KEY = b'\x05'
TAG_HTK = b'\x10'
TAG_ATK = b'\x11'
TAG_H1 = b'\x20'
TAG_H2 = b'\x21'
TAG_BLESSING = b'\x30'
TAG_CHAIN = b'\x31'
TAG_SIGNED = b'\x32'

KEY_BYTES = 32


def tagged_hash(tag, *parts):
    h = hashlib.sha256(tag)
    for part in parts:
        h.update(bytes(part))
    return h.digest()


def hash_to_int(tag, data, order):
    """reduce a 512-bit expansion of `data` modulo `order`

    The expansion is SHA256(tag || 0x00 || data) || SHA256(tag || 0x01 || data).
    """
    wide = tagged_hash(tag, b'\x00', data) + tagged_hash(tag, b'\x01', data)
    return int.from_bytes(wide, 'big') % order


def prg(seed, length, info=b'privdisc prg'):
    """expand a 32-byte seed with HKDF-Expand (HMAC-SHA-256 counter mode)"""
    return HKDFExpand(hashes.SHA256(), length, info).derive(bytes(seed))


def extract(key, data):
    """HMAC-SHA-256(key, data)"""
    h = crypto_hmac.HMAC(bytes(key), hashes.SHA256())
    h.update(bytes(data))
    return h.finalize()


# -----------------------------------------------------------------------------
# handshake key schedules
# -----------------------------------------------------------------------------

HandshakeKeys = namedtuple('HandshakeKeys', ['htk', 'atk'])

DiscoveryKeys = namedtuple('DiscoveryKeys', ['htk', 'htk2', 'exk', 'eadk'])


def kdf_sigma(gx, gy, gxy):
    """(htk, atk) for a SIGMA handshake from encoded DH values"""
    return HandshakeKeys(
        htk=tagged_hash(TAG_HTK, gx, gy, gxy),
        atk=tagged_hash(TAG_ATK, gx, gy, gxy),
    )


def key_schedule_0rtt(gs, gx, gsx):
    """(htk, htk', exk, eadk) for a 0-RTT exchange

    k = H1(gs || gx || gsx) is expanded to 128 bytes and split in that order.
    """
    k = tagged_hash(TAG_H1, gs, gx, gsx)
    out = prg(k, 4 * KEY_BYTES, info=b'privdisc 0rtt')
    return DiscoveryKeys(*(out[i : i + KEY_BYTES] for i in range(0, len(out), KEY_BYTES)))


def derive_atk(exk, gx, gy, gxy):
    """atk = Extract(exk, H2(gx, gy, gxy))"""
    return extract(exk, tagged_hash(TAG_H2, gx, gy, gxy))
