"""Private mutual authentication.

A SIGMA-I exchange in which the server's identity is only revealed to
clients whose own name satisfies the server's policy::

    C -> S  M1 = (sid, g^x)
    S -> C  M2 = (sid, g^y, c)
    C -> S  M3 = (sid, AEAD_htk(id_C, sig_C(sid, id_C, g^x, g^y)))

with (htk, atk) = KDF(g^x, g^y, g^xy). The content of ``c`` depends on the
mode:

``sigma``
    plain SIGMA-I: AEAD_htk(id_S, sig_S(sid, id_S, g^x, g^y))
``cacheable``
    AEAD_htk(ct_S, sig_S(sid, ct_S, g^x, g^y)) where ct_S is the server
    blessing prefix-encrypted under the server policy, computed once and
    reused across sessions
``unlinkable``
    PE.Enc(policy, AEAD_htk(id_S, sig_S(sid, id_S, g^x, g^y))), fresh per
    session, so nothing static (not even a signature) is visible

The client never sends its blessing before it has authenticated the
server, and only checks the server's ciphertext at all if its own name
satisfies the (cleartext) server policy. All aborts are silent: the
session moves to Aborted, its ephemeral exponent is erased, and
:class:`~privdisc.error.HandshakeAborted` is raised to the caller. Nothing
goes on the wire.

The client completes when it sends M3.
"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
from collections import namedtuple

from traitlets import Enum
from traitlets import Instance
from traitlets.config.configurable import LoggingConfigurable
from traitlets.log import get_logger

from privdisc.crypto import aead
from privdisc.crypto.dh import DHKeyPair
from privdisc.crypto.dh import validate_share
from privdisc.crypto.entropy import resolve
from privdisc.crypto.kdf import kdf_sigma
from privdisc.crypto.prefix import pe_dec
from privdisc.crypto.prefix import pe_enc
from privdisc.error import HandshakeAborted
from privdisc.error import MalformedError
from privdisc.error import NotAuthorized
from privdisc.error import PrivDiscError
from privdisc.principals import Blessing
from privdisc.principals import check_signature
from privdisc.principals import Deployment
from privdisc.principals import LABEL_SIGMA_CLIENT
from privdisc.principals import LABEL_SIGMA_SERVER
from privdisc.principals import Principal
from privdisc.serialize import tlv
from privdisc.serialize import wire

MODES = ('sigma', 'cacheable', 'unlinkable')

AWAIT_RESPONSE = 'AwaitResponse'
AWAIT_FINISH = 'AwaitFinish'
COMPLETE = 'Complete'
ABORTED = 'Aborted'

SessionResult = namedtuple('SessionResult', ['sid', 'peer_name', 'atk', 'htk'])


def _signed_tuple(sid, identity, gx, gy):
    return tlv.encode((0x01, sid), (0x02, identity), (0x03, gx), (0x04, gy))


def _inner(identity, signature):
    return tlv.encode((0x01, identity), (0x02, signature))


def _parse_inner(data):
    r = tlv.Reader(data, 'handshake payload')
    identity = r.expect(0x01)
    signature = r.expect(0x02)
    r.done()
    return identity, signature


class CachedServerIdentity(object):
    """The server blessing prefix-encrypted under the server policy.

    Immutable; shared by every cacheable-mode session of one server.
    """

    def __init__(self, ct, policy):
        self.ct = ct
        self.policy = policy
        self.body = wire.prefix_ct_body(ct)

    @classmethod
    def create(cls, principal, deployment, entropy=None):
        policy = principal.policy
        ct = pe_enc(deployment.mpk, policy, principal.blessing.encode(), entropy)
        return cls(ct, policy)


class _Session(object):
    role = None
    send_direction = None
    recv_direction = None

    def __init__(self, principal, deployment, mode='cacheable', entropy=None):
        if mode not in MODES:
            raise ValueError("unknown handshake mode %r" % mode)
        if mode != 'sigma' and self.role == 'server' and principal.policy is None:
            raise ValueError("%s mode needs a server policy" % mode)
        self.principal = principal
        self.deployment = deployment
        self.mode = mode
        self.entropy = resolve(entropy)
        self.state = None
        self.sid = None
        self.dh = None
        self.gx = None
        self.gy = None
        self.keys = None
        self.peer_name = None
        self.peer_blessing = None
        self.result = None
        self.abort_reason = None
        self.app = None
        self.log = get_logger()

    @property
    def exponent(self):
        """the live ephemeral exponent, None once erased"""
        return self.dh.exponent if self.dh is not None else None

    def erase(self):
        if self.dh is not None:
            self.dh.erase()

    def abort(self, reason, cause=None):
        self.state = ABORTED
        self.abort_reason = reason
        self.erase()
        self.log.debug(
            "mutual_auth::%s abort sid=%s: %s (%s)",
            self.role,
            self.sid.hex() if self.sid else '-',
            reason,
            cause,
        )
        return HandshakeAborted(reason, cause)

    def _complete(self, peer_blessing, peer_name):
        self.peer_blessing = peer_blessing
        self.peer_name = peer_name
        self.state = COMPLETE
        self.erase()
        self.app = aead.Channel(self.keys.atk, self.send_direction, self.recv_direction)
        self.result = SessionResult(self.sid, peer_name, self.keys.atk, self.keys.htk)
        self.log.debug("mutual_auth::%s complete with %s", self.role, peer_name)
        return self.result

    def _expect_state(self, state):
        if self.state != state:
            raise self.abort('bad-state', MalformedError("session is %s" % self.state))


class ClientSession(_Session):
    role = 'client'
    send_direction = aead.CLIENT_DIRECTION
    recv_direction = aead.SERVER_DIRECTION


class ServerSession(_Session):
    role = 'server'
    send_direction = aead.SERVER_DIRECTION
    recv_direction = aead.CLIENT_DIRECTION

    def __init__(self, principal, deployment, mode='cacheable', entropy=None, cached=None):
        super(ServerSession, self).__init__(principal, deployment, mode, entropy)
        self.cached = cached


# -----------------------------------------------------------------------------
# protocol steps
# -----------------------------------------------------------------------------


def client_init(session, entropy=None):
    """Start a handshake: choose sid and x, return M1."""
    if entropy is not None:
        session.entropy = entropy
    session.sid = session.entropy.bytes(wire.SID_BYTES)
    session.dh = DHKeyPair.generate(session.entropy)
    session.gx = session.dh.share
    session.state = AWAIT_RESPONSE
    return wire.M1(session.sid, session.gx)


def server_respond(session, m1):
    """Answer M1 with M2."""
    if session.state is not None:
        raise session.abort('bad-state')
    try:
        session.sid = bytes(m1.sid)
        session.gx = validate_share(m1.gx)
        if len(session.sid) != wire.SID_BYTES:
            raise MalformedError("bad sid length")
    except PrivDiscError as e:
        raise session.abort('malformed-m1', e)
    session.dh = DHKeyPair.generate(session.entropy)
    session.gy = session.dh.share
    session.keys = kdf_sigma(session.gx, session.gy, session.dh.exchange(session.gx))
    blessing = session.principal.blessing.encode()
    nonce = aead.direction_nonce(aead.SERVER_DIRECTION, 0)

    if session.mode == 'cacheable':
        if session.cached is None:
            session.cached = CachedServerIdentity.create(
                session.principal, session.deployment, session.entropy
            )
        identity = session.cached.body
    else:
        identity = blessing
    signature = session.principal.sign(
        LABEL_SIGMA_SERVER, _signed_tuple(session.sid, identity, session.gx, session.gy)
    )
    c = aead.seal(session.keys.htk, nonce, _inner(identity, signature))
    if session.mode == 'unlinkable':
        ct = pe_enc(session.deployment.mpk, session.principal.policy, c, session.entropy)
        c = wire.prefix_ct_body(ct)
    session.state = AWAIT_FINISH
    return wire.M2(session.sid, session.gy, c)


def _open_server_identity(session, m2):
    """-> (server blessing, identity bytes it signed, signature, our blessing)"""
    principal = session.principal
    nonce = aead.direction_nonce(aead.SERVER_DIRECTION, 0)
    if session.mode == 'sigma':
        identity, signature = _parse_inner(aead.open_(session.keys.htk, nonce, m2.c))
        return Blessing.decode(identity), identity, signature, principal.blessing

    if session.mode == 'unlinkable':
        ct = wire.parse_prefix_ct(m2.c)
        ours = principal.blessing_for(ct.policy)
        if ours is None:
            raise NotAuthorized("%s not in server policy %s" % (principal.name, ct.policy))
        sealed = pe_dec(principal.keyring_for(ours), ct)
        identity, signature = _parse_inner(aead.open_(session.keys.htk, nonce, sealed))
        return Blessing.decode(identity), identity, signature, ours

    identity, signature = _parse_inner(aead.open_(session.keys.htk, nonce, m2.c))
    ct = wire.parse_prefix_ct(identity)
    ours = principal.blessing_for(ct.policy)
    if ours is None:
        raise NotAuthorized("%s not in server policy %s" % (principal.name, ct.policy))
    server = Blessing.decode(pe_dec(principal.keyring_for(ours), ct))
    return server, identity, signature, ours


def client_process_response(session, m2):
    """Authenticate the server from M2 and, if it passes, return M3."""
    session._expect_state(AWAIT_RESPONSE)
    try:
        if bytes(m2.sid) != session.sid:
            raise MalformedError("sid mismatch")
        session.gy = validate_share(m2.gy)
        session.keys = kdf_sigma(session.gx, session.gy, session.dh.exchange(session.gy))
    except PrivDiscError as e:
        raise session.abort('malformed-m2', e)

    try:
        server, signed_identity, signature, ours = _open_server_identity(session, m2)
    except NotAuthorized as e:
        raise session.abort('not-in-server-policy', e)
    except PrivDiscError as e:
        raise session.abort('server-identity', e)

    try:
        server_name = session.deployment.validate(server)
    except PrivDiscError as e:
        raise session.abort('server-chain', e)
    if not session.principal.accepts(server_name):
        raise session.abort('server-policy', NotAuthorized(str(server_name)))
    try:
        check_signature(
            server.public_key,
            LABEL_SIGMA_SERVER,
            _signed_tuple(session.sid, signed_identity, session.gx, session.gy),
            signature,
        )
    except PrivDiscError as e:
        raise session.abort('server-signature', e)
    if ours is None:
        raise session.abort('no-blessing')

    identity = ours.encode()
    sig = session.principal.sign(
        LABEL_SIGMA_CLIENT, _signed_tuple(session.sid, identity, session.gx, session.gy)
    )
    nonce = aead.direction_nonce(aead.CLIENT_DIRECTION, 0)
    c = aead.seal(session.keys.htk, nonce, _inner(identity, sig))
    session._complete(server, server_name)
    return wire.M3(session.sid, c)


def server_process_finish(session, m3):
    """Authenticate the client from M3; returns the SessionResult."""
    session._expect_state(AWAIT_FINISH)
    try:
        if bytes(m3.sid) != session.sid:
            raise MalformedError("sid mismatch")
        nonce = aead.direction_nonce(aead.CLIENT_DIRECTION, 0)
        identity, signature = _parse_inner(aead.open_(session.keys.htk, nonce, m3.c))
        client = Blessing.decode(identity)
    except PrivDiscError as e:
        raise session.abort('malformed-m3', e)
    try:
        client_name = session.deployment.validate(client)
    except PrivDiscError as e:
        raise session.abort('client-chain', e)
    if not session.principal.accepts(client_name):
        raise session.abort('client-policy', NotAuthorized(str(client_name)))
    try:
        check_signature(
            client.public_key,
            LABEL_SIGMA_CLIENT,
            _signed_tuple(session.sid, identity, session.gx, session.gy),
            signature,
        )
    except PrivDiscError as e:
        raise session.abort('client-signature', e)
    return session._complete(client, client_name)


# -----------------------------------------------------------------------------
# application data
# -----------------------------------------------------------------------------


def seal_app_data(session, plaintext):
    """an AppData message under atk"""
    if session.state != COMPLETE:
        raise HandshakeAborted('not-complete')
    return wire.AppData(session.sid, session.app.seal(plaintext))


def open_app_data(session, msg):
    if session.state != COMPLETE:
        raise HandshakeAborted('not-complete')
    if bytes(msg.sid) != session.sid:
        raise MalformedError("app data for another session")
    return session.app.open(msg.ct)


class MutualAuthServer(LoggingConfigurable):
    """A principal accepting private mutual-authentication handshakes.

    Holds the cached server identity for the cacheable mode.
    """

    mode = Enum(
        list(MODES),
        default_value='cacheable',
        config=True,
        help="""Handshake variant.

        'cacheable' reuses one prefix-encrypted server identity across sessions,
        'unlinkable' prefix-encrypts the whole response per session,
        'sigma' is plain SIGMA-I with the server blessing under htk only.
        """,
    )

    principal = Instance(Principal)
    deployment = Instance(Deployment)
    cached = Instance(CachedServerIdentity, allow_none=True)

    def precompute(self, entropy=None):
        """build the cached server identity ahead of the first session"""
        if self.mode == 'cacheable' and self.cached is None:
            self.cached = CachedServerIdentity.create(self.principal, self.deployment, entropy)
            self.log.debug("mutual_auth::cached ct_S for %s", self.principal.name)
        return self.cached

    def session(self, entropy=None):
        if self.mode == 'cacheable':
            self.precompute(entropy)
        return ServerSession(
            self.principal, self.deployment, self.mode, entropy, cached=self.cached
        )
