"""Advertisement framings: mDNS TXT records and the BLE pointer record.

A broadcast rides in the TXT record of a service registered under a
generic type that says nothing about the service. Its encoding is
base64url (no padding) split into 240-character values under the keys
``p0``, ``p1``, ... The whole encoded broadcast must fit the 1300-byte
budget of a single mDNS response; larger policies use the BLE pointer
mode instead, which only carries an endpoint to fetch the broadcast from.
"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
import base64
import ipaddress
import re
import struct

from zeroconf import ServiceInfo

from privdisc.crypto.entropy import resolve
from privdisc.error import MalformedError
from privdisc.error import OversizeError
from privdisc.serialize import wire

SERVICE_TYPE = '_privdisc._tcp.local.'
ADVERT_BUDGET = 1300
CHUNK_CHARS = 240

BLE_MAGIC = b'PD'
BLE_VERSION = 1
BLE_RECORD_BYTES = 31
_ble = struct.Struct('!2sB16sH10s')

_chunk_key = re.compile(r'^p(0|[1-9][0-9]*)$')


def _b64encode(data):
    return base64.urlsafe_b64encode(data).rstrip(b'=').decode('ascii')


def _b64decode(s):
    if isinstance(s, bytes):
        s = s.decode('ascii')
    if not re.match(r'^[A-Za-z0-9_-]*$', s) or len(s) % 4 == 1:
        raise MalformedError("bad base64url text in TXT record")
    return base64.urlsafe_b64decode(s + '=' * (-len(s) % 4))


def encoded_broadcast(broadcast):
    data = broadcast if isinstance(broadcast, bytes) else wire.encode(broadcast)
    if len(data) > ADVERT_BUDGET:
        raise OversizeError(
            "advertisement is %i bytes, over the %i byte budget; use a BLE pointer"
            % (len(data), ADVERT_BUDGET)
        )
    return data


def to_mdns_txt(broadcast):
    """TXT key/value pairs ``{'p0': ..., 'p1': ...}`` for a broadcast."""
    text = _b64encode(encoded_broadcast(broadcast))
    chunks = [text[i : i + CHUNK_CHARS] for i in range(0, len(text), CHUNK_CHARS)]
    return {'p%i' % i: chunk for i, chunk in enumerate(chunks)}


def from_mdns_txt(properties):
    """Reassemble and decode a broadcast from TXT properties.

    Accepts the dict from :func:`to_mdns_txt`, a zeroconf ``properties``
    dict (bytes keys and values) or raw TXT record bytes.
    """
    if isinstance(properties, bytes):
        properties = ServiceInfo(
            SERVICE_TYPE, 'x.' + SERVICE_TYPE, properties=properties
        ).properties
    chunks = {}
    for key, value in properties.items():
        if isinstance(key, bytes):
            key = key.decode('ascii', 'replace')
        if not _chunk_key.match(key):
            raise MalformedError("unexpected TXT key %r" % key)
        if value is None or isinstance(value, bool):
            raise MalformedError("TXT key %r has no value" % key)
        chunks[int(key[1:])] = value.decode('ascii') if isinstance(value, bytes) else value
    if not chunks or sorted(chunks) != list(range(len(chunks))):
        raise MalformedError("TXT chunks missing or out of sequence")
    data = _b64decode(''.join(chunks[i] for i in range(len(chunks))))
    return wire.decode(data, expect=wire.T_BROADCAST)


def instance_name(entropy=None):
    """a random instance label; it changes with every broadcast"""
    return resolve(entropy).bytes(8).hex()


def to_service_info(broadcast, port=0, server='privdisc.local.', entropy=None, addresses=None):
    """A zeroconf ServiceInfo carrying the broadcast, ready to register."""
    name = '%s.%s' % (instance_name(entropy), SERVICE_TYPE)
    return ServiceInfo(
        SERVICE_TYPE,
        name,
        port=port,
        properties=to_mdns_txt(broadcast),
        server=server,
        addresses=addresses or [],
    )


def txt_record(broadcast):
    """the raw TXT rdata for a broadcast"""
    return to_service_info(broadcast).text


# -----------------------------------------------------------------------------
# BLE pointer
# -----------------------------------------------------------------------------


def to_ble_pointer(address, port):
    """31-byte pointer record: magic || version || address || port || reserved

    IPv4 addresses are stored IPv4-mapped.
    """
    ip = ipaddress.ip_address(address)
    if ip.version == 4:
        ip = ipaddress.IPv6Address('::ffff:%s' % ip)
    if not 0 <= port <= 0xFFFF:
        raise ValueError("port out of range: %r" % port)
    return _ble.pack(BLE_MAGIC, BLE_VERSION, ip.packed, port, bytes(10))


def parse_ble_pointer(record):
    """(address, port) from a pointer record"""
    record = bytes(record)
    if len(record) != BLE_RECORD_BYTES:
        raise MalformedError("BLE pointer must be %i bytes" % BLE_RECORD_BYTES)
    magic, version, packed, port, reserved = _ble.unpack(record)
    if magic != BLE_MAGIC:
        raise MalformedError("bad BLE pointer magic %r" % magic)
    if version != BLE_VERSION:
        raise MalformedError("unsupported BLE pointer version %i" % version)
    if reserved != bytes(10):
        raise MalformedError("BLE pointer reserved bytes not zero")
    ip = ipaddress.IPv6Address(packed)
    if ip.ipv4_mapped is not None:
        return str(ip.ipv4_mapped), port
    return str(ip), port
