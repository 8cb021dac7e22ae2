"""Private service discovery with a 0-RTT mutual-authentication exchange.

Broadcast::

    bid, expiry, PE.Enc(policy, (id_S, g^s, expiry, sig_S(bid, id_S, g^s, expiry)))

Exchange, with (htk, htk', exk, eadk) = PRG(H1(g^s, g^x, g^sx))::

    C -> S  F1 = (bid, sid, g^x,
                  c1 = AEAD_htk(digest(id_S), id_C, sig_C(bid, sid, id_S, id_C, g^s, g^x)),
                  c2 = AEAD_eadk(early data))                       [c2 optional]
    S -> C  F2 = (bid, sid, g^y,
                  c1' = AEAD_htk'(bid, sid, id_S, id_C, g^s, g^x, g^y),
                  c2' = AEAD_atk(reply))                            [c2' optional]

    atk = Extract(exk, H2(g^x, g^y, g^xy))

Identities inside the handshake are blessing digests. Early data is only
as forward-secret as the semi-static exponent s: whoever learns s before
it is erased can read c2, but not anything under atk, which needs g^xy.
"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
from collections import namedtuple
from threading import Condition

from traitlets import Any
from traitlets import default
from traitlets import Instance
from traitlets import Integer
from traitlets.config.configurable import LoggingConfigurable
from traitlets.log import get_logger

from privdisc.crypto import aead
from privdisc.crypto import dh
from privdisc.crypto.entropy import resolve
from privdisc.crypto.kdf import derive_atk
from privdisc.crypto.kdf import key_schedule_0rtt
from privdisc.crypto.prefix import pe_dec
from privdisc.crypto.prefix import pe_enc
from privdisc.crypto.prefix import PrefixPolicy
from privdisc.error import CounterOverflow
from privdisc.error import DecryptionFailed
from privdisc.error import ExpiredError
from privdisc.error import HandshakeAborted
from privdisc.error import MalformedError
from privdisc.error import NotAuthorized
from privdisc.error import PrivDiscError
from privdisc.error import ReplayError
from privdisc.principals import Blessing
from privdisc.principals import check_signature
from privdisc.principals import Deployment
from privdisc.principals import LABEL_0RTT_CLIENT
from privdisc.principals import LABEL_BROADCAST
from privdisc.principals import Principal
from privdisc.protocol.replay import ReplayCache
from privdisc.serialize import tlv
from privdisc.serialize import wire
from privdisc.util import ct_equal
from privdisc.util import short_hex
from privdisc.util import unix_now

__all__ = [
    'Advertiser',
    'DiscoveredService',
    'DiscoverySession',
    'PfsReport',
    'SemiStaticState',
    'ZeroRttTranscript',
    'client_complete',
    'client_connect',
    'demonstrate_pfs_window',
    'key_schedule_0rtt',
    'make_broadcast',
    'process_broadcast',
    'server_accept',
]

DEFAULT_TTL = 3600
MAX_COUNTER = 2 ** 64 - 1

DiscoveredService = namedtuple(
    'DiscoveredService', ['name', 'gs', 'bid', 'expiry', 'blessing', 'via']
)
DiscoveredService.__doc__ = """A broadcast the client could open.

``blessing`` is the server's, ``via`` the client blessing whose name
satisfied the broadcast policy.
"""

AcceptResult = namedtuple('AcceptResult', ['f2', 'atk', 'early_data', 'peer_name', 'sid'])
CompleteResult = namedtuple('CompleteResult', ['sid', 'peer_name', 'atk', 'reply'])
ZeroRttTranscript = namedtuple('ZeroRttTranscript', ['gs', 'f1', 'f2'])
PfsReport = namedtuple(
    'PfsReport',
    ['compromised', 'early_data_recovered', 'early_data', 'atk_data_recovered', 'atk_data'],
)


# -----------------------------------------------------------------------------
# broadcasts
# -----------------------------------------------------------------------------


def make_bid(counter, entropy=None):
    """8-byte big-endian counter || 8 random bytes"""
    if not 0 <= counter <= MAX_COUNTER:
        raise CounterOverflow("broadcast counter %i out of range" % counter)
    return counter.to_bytes(8, 'big') + resolve(entropy).bytes(8)


def bid_counter(bid):
    return int.from_bytes(bid[:8], 'big')


class SemiStaticState(object):
    """The exponent behind one broadcast; erased when the broadcast rotates."""

    def __init__(self, keypair, bid, expiry, created):
        if expiry <= created:
            raise ValueError("expiry %i not after creation %i" % (expiry, created))
        self.keypair = keypair
        self.bid = bid
        self.expiry = expiry
        self.created = created
        self.gs = keypair.share

    @property
    def s(self):
        return self.keypair.exponent

    @property
    def erased(self):
        return self.keypair.erased

    def erase(self):
        self.keypair.erase()

    def expired(self, now):
        return now >= self.expiry


def broadcast_message(bid, blessing, gs, expiry):
    return tlv.encode(
        (0x01, bid), (0x02, blessing), (0x03, gs), (0x04, tlv.uint_bytes(expiry, 8))
    )


def broadcast_payload(blessing, gs, expiry, signature):
    return tlv.encode(
        (0x01, blessing), (0x02, gs), (0x03, tlv.uint_bytes(expiry, 8)), (0x04, signature)
    )


def make_broadcast(
    server, deployment, policy, ttl_seconds, counter, now=None, entropy=None, previous=None
):
    """Sign and prefix-encrypt a new broadcast.

    Erases `previous` (the outgoing SemiStaticState) once the new broadcast
    is built; a failure leaves it untouched.

    Returns
    -------
    (Broadcast, SemiStaticState)
    """
    if ttl_seconds <= 0:
        raise ValueError("ttl must be positive, not %r" % ttl_seconds)
    entropy = resolve(entropy)
    now = unix_now() if now is None else now
    bid = make_bid(counter, entropy)
    expiry = now + ttl_seconds
    keypair = dh.DHKeyPair.generate(entropy)
    blessing = server.blessing.encode()
    signature = server.sign(
        LABEL_BROADCAST, broadcast_message(bid, blessing, keypair.share, expiry)
    )
    payload = broadcast_payload(blessing, keypair.share, expiry, signature)
    adv_ct = pe_enc(deployment.mpk, PrefixPolicy.parse(policy), payload, entropy)
    state = SemiStaticState(keypair, bid, expiry, now)
    if previous is not None:
        previous.erase()
    return wire.Broadcast(bid, expiry, adv_ct), state


def _parse_payload(data):
    r = tlv.Reader(data, 'broadcast payload')
    blessing = r.expect(0x01)
    gs = r.expect(0x02, dh.SHARE_BYTES)
    expiry = r.uint(0x03, 8)
    signature = r.expect(0x04)
    r.done()
    return blessing, gs, expiry, signature


def process_broadcast(client, deployment, data, now=None):
    """Open a broadcast addressed to `client`.

    Raises ExpiredError, NotAuthorized, DecryptionFailed, MalformedError,
    ChainError or BadSignature; a client drops the broadcast silently on
    any of them.
    """
    now = unix_now() if now is None else now
    b = wire.decode(data, expect=wire.T_BROADCAST) if isinstance(data, bytes) else data
    if now >= b.expiry:
        raise ExpiredError("broadcast expired")
    via = client.blessing_for(b.adv_ct.policy)
    if via is None:
        raise NotAuthorized("%s does not satisfy %s" % (client.name, b.adv_ct.policy))
    payload = pe_dec(client.keyring_for(via), b.adv_ct)
    blessing_bytes, gs, expiry, signature = _parse_payload(payload)
    if expiry != b.expiry:
        raise MalformedError("cleartext expiry does not match the signed one")
    dh.validate_share(gs)
    blessing = Blessing.decode(blessing_bytes)
    name = deployment.validate(blessing)
    if not client.accepts(name):
        raise NotAuthorized("server %s not in client policy" % name)
    check_signature(
        blessing.public_key,
        LABEL_BROADCAST,
        broadcast_message(b.bid, blessing_bytes, gs, expiry),
        signature,
    )
    if now >= expiry:
        raise ExpiredError("broadcast expired")
    return DiscoveredService(name, gs, b.bid, expiry, blessing, via)


# -----------------------------------------------------------------------------
# 0-RTT exchange
# -----------------------------------------------------------------------------


def _client_signed(bid, sid, server_digest, client_blessing, gs, gx):
    return tlv.encode(
        (0x01, bid),
        (0x02, sid),
        (0x03, server_digest),
        (0x04, client_blessing),
        (0x05, gs),
        (0x06, gx),
    )


def _echo(bid, sid, server_digest, client_digest, gs, gx, gy):
    return tlv.encode(
        (0x01, bid),
        (0x02, sid),
        (0x03, server_digest),
        (0x04, client_digest),
        (0x05, gs),
        (0x06, gx),
        (0x07, gy),
    )


def _nonce(direction):
    # every 0-RTT key seals at most one message per direction
    return aead.direction_nonce(direction, 0)


class DiscoverySession(object):
    """Client state between sending F1 and receiving F2."""

    def __init__(self, principal, svc):
        self.principal = principal
        self.svc = svc
        self.sid = None
        self.keypair = None
        self.gx = None
        self.keys = None
        self.state = None
        self.result = None
        self.abort_reason = None
        self.log = get_logger()

    @property
    def exponent(self):
        return self.keypair.exponent if self.keypair is not None else None

    def erase(self):
        if self.keypair is not None:
            self.keypair.erase()

    def abort(self, reason, cause=None):
        self.state = 'Aborted'
        self.abort_reason = reason
        self.erase()
        self.log.debug("discovery::client abort %s (%s)", reason, cause)
        return HandshakeAborted(reason, cause)


def client_connect(client, svc, early_data=None, entropy=None, now=None):
    """Build F1 for a discovered service.

    Returns
    -------
    (DiscoverySession, F1)
    """
    now = unix_now() if now is None else now
    if now >= svc.expiry:
        raise ExpiredError("service broadcast expired")
    entropy = resolve(entropy)
    session = DiscoverySession(client, svc)
    session.sid = entropy.bytes(wire.SID_BYTES)
    session.keypair = dh.DHKeyPair.generate(entropy)
    session.gx = session.keypair.share
    session.keys = key_schedule_0rtt(svc.gs, session.gx, session.keypair.exchange(svc.gs))

    own = svc.via.encode()
    server_digest = svc.blessing.digest()
    signature = client.sign(
        LABEL_0RTT_CLIENT,
        _client_signed(svc.bid, session.sid, server_digest, own, svc.gs, session.gx),
    )
    c1 = aead.seal(
        session.keys.htk,
        _nonce(aead.CLIENT_DIRECTION),
        tlv.encode((0x01, server_digest), (0x02, own), (0x03, signature)),
    )
    c2 = None
    if early_data is not None:
        c2 = aead.seal(session.keys.eadk, _nonce(aead.CLIENT_DIRECTION), early_data)
    session.state = 'AwaitF2'
    return session, wire.F1(svc.bid, session.sid, session.gx, c1, c2)


def server_accept(server, deployment, sstate, cache, f1, reply=None, entropy=None, now=None):
    """Validate F1 and answer with F2.

    Checks, in order: the broadcast is current and unexpired, c1 opens,
    the sid is not a replay, the client chain, the server policy, the
    client signature, early data opens. Only then is the sid recorded
    (atomically; a concurrent duplicate loses) and F2 built.

    Returns an AcceptResult; raises HandshakeAborted otherwise.
    """
    log = get_logger()
    now = unix_now() if now is None else now

    def abort(reason, cause=None):
        log.debug("discovery::server abort sid=%s: %s (%s)", short_hex(f1.sid), reason, cause)
        return HandshakeAborted(reason, cause)

    if sstate.erased or bytes(f1.bid) != sstate.bid:
        raise abort('unknown-bid')
    if sstate.expired(now):
        raise abort('expired', ExpiredError("broadcast expired"))
    try:
        gx = dh.validate_share(f1.gx)
        keys = key_schedule_0rtt(sstate.gs, gx, sstate.keypair.exchange(gx))
        r = tlv.Reader(aead.open_(keys.htk, _nonce(aead.CLIENT_DIRECTION), f1.c1), 'c1')
        server_digest = r.expect(0x01, wire.DIGEST_BYTES)
        client_bytes = r.expect(0x02)
        signature = r.expect(0x03)
        r.done()
    except PrivDiscError as e:
        raise abort('c1', e)
    try:
        cache.check(f1.bid, f1.sid)
    except ReplayError as e:
        raise abort('replay', e)
    if not ct_equal(server_digest, server.blessing.digest()):
        raise abort('server-name', MalformedError("F1 names another server"))
    try:
        client = Blessing.decode(client_bytes)
        client_name = deployment.validate(client)
    except PrivDiscError as e:
        raise abort('client-chain', e)
    if not server.accepts(client_name):
        raise abort('client-policy', NotAuthorized(str(client_name)))
    try:
        check_signature(
            client.public_key,
            LABEL_0RTT_CLIENT,
            _client_signed(f1.bid, f1.sid, server_digest, client_bytes, sstate.gs, gx),
            signature,
        )
    except PrivDiscError as e:
        raise abort('client-signature', e)
    early_data = None
    if f1.c2 is not None:
        try:
            early_data = aead.open_(keys.eadk, _nonce(aead.CLIENT_DIRECTION), f1.c2)
        except DecryptionFailed as e:
            raise abort('early-data', e)
    try:
        cache.add(f1.bid, f1.sid)
    except ReplayError as e:
        raise abort('replay', e)

    y = dh.DHKeyPair.generate(entropy)
    gy = y.share
    atk = derive_atk(keys.exk, gx, gy, y.exchange(gx))
    y.erase()
    c1 = aead.seal(
        keys.htk2,
        _nonce(aead.SERVER_DIRECTION),
        _echo(f1.bid, f1.sid, server_digest, client.digest(), sstate.gs, gx, gy),
    )
    c2 = None
    if reply is not None:
        c2 = aead.seal(atk, _nonce(aead.SERVER_DIRECTION), reply)
    log.debug("discovery::accepted %s sid=%s", client_name, short_hex(f1.sid))
    return AcceptResult(wire.F2(f1.bid, f1.sid, gy, c1, c2), atk, early_data, client_name, f1.sid)


def client_complete(session, f2):
    """Check the server's echo in F2 and derive atk.

    Returns a CompleteResult; raises HandshakeAborted otherwise.
    """
    if session.state != 'AwaitF2':
        raise session.abort('bad-state')
    svc = session.svc
    try:
        if bytes(f2.bid) != svc.bid or bytes(f2.sid) != session.sid:
            raise MalformedError("F2 for another session")
        gy = dh.validate_share(f2.gy)
        echo = aead.open_(session.keys.htk2, _nonce(aead.SERVER_DIRECTION), f2.c1)
    except PrivDiscError as e:
        raise session.abort('f2', e)
    expected = _echo(
        svc.bid, session.sid, svc.blessing.digest(), svc.via.digest(), svc.gs, session.gx, gy
    )
    if not ct_equal(echo, expected):
        raise session.abort('echo-mismatch')
    atk = derive_atk(session.keys.exk, session.gx, gy, session.keypair.exchange(gy))
    session.erase()
    reply = None
    if f2.c2 is not None:
        try:
            reply = aead.open_(atk, _nonce(aead.SERVER_DIRECTION), f2.c2)
        except DecryptionFailed as e:
            raise session.abort('reply', e)
    session.state = 'Complete'
    session.result = CompleteResult(session.sid, svc.name, atk, reply)
    return session.result


# -----------------------------------------------------------------------------
# forward-secrecy window
# -----------------------------------------------------------------------------


def _try_open(keys, nonce, ct):
    for key in keys:
        try:
            return aead.open_(key, nonce, ct)
        except DecryptionFailed:
            pass
    return None


def demonstrate_pfs_window(transcript, compromised_s=None, compromised_x=None):
    """What a passive observer of one exchange learns from a revealed secret.

    With the semi-static `compromised_s` the observer derives the 0-RTT
    schedule and reads the early data, but no key it can derive opens the
    atk-protected reply. With the client's `compromised_x` both open.
    """
    gs, f1, f2 = transcript
    if isinstance(f1, bytes):
        f1 = wire.decode(f1, expect=wire.T_F1)
    if isinstance(f2, bytes):
        f2 = wire.decode(f2, expect=wire.T_F2)
    if (compromised_s is None) == (compromised_x is None):
        raise ValueError("reveal exactly one of s and x")

    client_nonce = _nonce(aead.CLIENT_DIRECTION)
    server_nonce = _nonce(aead.SERVER_DIRECTION)
    if compromised_s is not None:
        label = 's'
        keys = key_schedule_0rtt(gs, f1.gx, dh.exchange(compromised_s, f1.gx))
        # g^xy is out of reach; these are all the keys the observer has
        candidates = list(keys)
    else:
        label = 'x'
        keys = key_schedule_0rtt(gs, f1.gx, dh.exchange(compromised_x, gs))
        atk = derive_atk(keys.exk, f1.gx, f2.gy, dh.exchange(compromised_x, f2.gy))
        candidates = list(keys) + [atk]

    early = _try_open([keys.eadk], client_nonce, f1.c2) if f1.c2 is not None else None
    reply = _try_open(candidates, server_nonce, f2.c2) if f2.c2 is not None else None
    return PfsReport(label, early is not None, early, reply is not None, reply)


# -----------------------------------------------------------------------------
# the advertiser
# -----------------------------------------------------------------------------


class Advertiser(LoggingConfigurable):
    """Owns a server's broadcasts: the counter, the live semi-static state
    and the replay cache.

    Rotation waits out in-flight acceptances before erasing a state, so no
    session is ever accepted under a state that is being erased.
    """

    ttl = Integer(
        DEFAULT_TTL, config=True, help="Lifetime of each broadcast, in seconds."
    )
    max_counter = Integer(
        MAX_COUNTER,
        config=True,
        help="Highest broadcast counter; rotating past it fails.",
    )

    principal = Instance(Principal)
    deployment = Instance(Deployment)
    policy = Instance(PrefixPolicy)
    cache = Instance(ReplayCache)
    clock = Any(help="callable returning unix seconds")

    @default('cache')
    def _cache_default(self):
        return ReplayCache(parent=self)

    @default('clock')
    def _clock_default(self):
        return unix_now

    def __init__(self, **kwargs):
        super(Advertiser, self).__init__(**kwargs)
        self.counter = 0
        self.state = None
        self.broadcast = None
        self._cond = Condition()
        self._inflight = 0
        self._rotating = False

    def rotate(self, entropy=None):
        """Issue the next broadcast and erase the current state.

        Waits for acceptances running under the current state to finish.
        """
        with self._cond:
            if self.ttl <= 0:
                raise ValueError("ttl must be positive, not %r" % self.ttl)
            self._cond.wait_for(lambda: not self._rotating)
            if self.counter >= self.max_counter:
                raise CounterOverflow("broadcast counter exhausted")
            self._rotating = True
            try:
                self._cond.wait_for(lambda: self._inflight == 0)
                previous = self.state
                self.broadcast, self.state = make_broadcast(
                    self.principal,
                    self.deployment,
                    self.policy,
                    self.ttl,
                    self.counter + 1,
                    now=self.clock(),
                    entropy=entropy,
                    previous=previous,
                )
                self.counter += 1
            finally:
                self._rotating = False
                self._cond.notify_all()
            if previous is not None:
                self.cache.forget(previous.bid)
            self.log.info(
                "discovery::broadcast %s expires %i", short_hex(self.state.bid), self.state.expiry
            )
            return self.broadcast

    def accept(self, f1, reply=None, entropy=None):
        """server_accept under the current state

        Acceptances run concurrently; only taking the state is serialized
        with rotation.
        """
        with self._cond:
            self._cond.wait_for(lambda: not self._rotating)
            if self.state is None:
                raise HandshakeAborted('no-broadcast')
            state = self.state
            self._inflight += 1
        try:
            return server_accept(
                self.principal,
                self.deployment,
                state,
                self.cache,
                f1,
                reply=reply,
                entropy=entropy,
                now=self.clock(),
            )
        finally:
            with self._cond:
                self._inflight -= 1
                self._cond.notify_all()
