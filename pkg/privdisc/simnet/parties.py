"""Endpoints for the simulated network.

Each party wraps one role of the protocols around the fabric: it turns
delivered frames into protocol calls, sends what they return, and records
its results in ``outputs`` (string values, hex for bytes) and the reasons
for every abort in ``aborts``. Frames a party cannot decode, or does not
expect in its current state, are ignored; aborts never produce a frame.
"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
import hashlib
from collections import OrderedDict

from traitlets import Bytes
from traitlets import Enum
from traitlets import Instance
from traitlets import Integer
from traitlets import List
from traitlets import Unicode
from traitlets.config.configurable import LoggingConfigurable

from privdisc.crypto.prefix import HierName
from privdisc.crypto.prefix import PrefixPolicy
from privdisc.error import HandshakeAborted
from privdisc.error import PrivDiscError
from privdisc.principals import Deployment
from privdisc.principals import Principal
from privdisc.protocol import discovery
from privdisc.protocol import mutual_auth
from privdisc.serialize import wire
from privdisc.simnet.fabric import BROADCAST
from privdisc.simnet.fabric import transcript_scan
from privdisc.util import short_hex


def name_digest(name):
    """the truncated name hash a sender beacons"""
    data = str(HierName.parse(name)).encode('utf8')
    return hashlib.sha256(data).digest()[: wire.BEACON_HASH_BYTES]


class Party(LoggingConfigurable):
    """Base endpoint: no-op callbacks and the bookkeeping helpers."""

    name = Unicode()
    principal = Instance(Principal, allow_none=True)
    deployment = Instance(Deployment, allow_none=True)

    tap = False

    def __init__(self, name, **kwargs):
        super(Party, self).__init__(name=name, **kwargs)
        self.fabric = None
        self.entropy = None
        self.outputs = OrderedDict()
        self.aborts = []

    def attach(self, fabric, entropy):
        self.fabric = fabric
        self.entropy = entropy

    @property
    def now(self):
        return self.fabric.now

    def unix_now(self):
        return self.fabric.unix_now()

    def stale(self, since):
        return self.fabric.now - since >= self.fabric.timeout

    def send(self, dst, msg):
        data = msg if isinstance(msg, bytes) else wire.encode(msg)
        return self.fabric.send(self.name, dst, data)

    def record(self, key, value):
        if isinstance(value, (bytes, bytearray)):
            value = bytes(value).hex()
        self.outputs[key] = str(value)

    def record_abort(self, reason):
        self.log.debug("simnet::%s aborted: %s", self.name, reason)
        self.aborts.append(reason)

    def decode(self, data, **kwargs):
        try:
            return wire.decode(data, **kwargs)
        except PrivDiscError as e:
            self.log.debug("simnet::%s ignored a frame: %s", self.name, e)
            return None

    # fabric callbacks

    def start(self):
        pass

    def receive(self, src, data):
        pass

    def observe_entry(self, entry):
        pass

    def tick(self, now):
        pass

    def finish(self):
        pass

    # compromise surface, read only

    def session_state(self, session=None):
        return {}

    def session_key(self, session=None):
        return None

    def broadcast_secret(self, bid=None):
        return None

    def __repr__(self):
        return "<%s %s>" % (self.__class__.__name__, self.name)


# -----------------------------------------------------------------------------
# private mutual authentication
# -----------------------------------------------------------------------------


class AuthClient(Party):
    """Initiates one handshake with `server` and optionally sends app data."""

    server = Unicode()
    mode = Enum(list(mutual_auth.MODES), default_value='cacheable')
    app_data = Bytes(None, allow_none=True)

    session = None
    last = 0.0

    def start(self):
        self.begin(self.server)

    def begin(self, dst):
        self.peer = dst
        self.session = mutual_auth.ClientSession(
            self.principal, self.deployment, self.mode, self.entropy
        )
        m1 = mutual_auth.client_init(self.session)
        self.last = self.now
        self.record('sid', m1.sid)
        self.record('state', self.session.state)
        self.send(dst, m1)

    def receive(self, src, data):
        msg = self.decode(data)
        if isinstance(msg, wire.M2):
            self.on_response(src, msg)
        elif isinstance(msg, wire.AppData):
            self.on_app_data(msg)

    def on_response(self, src, m2):
        if self.session is None or self.session.state != mutual_auth.AWAIT_RESPONSE:
            return
        self.last = self.now
        try:
            m3 = mutual_auth.client_process_response(self.session, m2)
        except HandshakeAborted as e:
            self.record('state', self.session.state)
            self.record_abort(e.reason)
            return
        self.send(self.peer, m3)
        result = self.session.result
        self.record('state', self.session.state)
        self.record('peer', result.peer_name)
        self.record('atk', result.atk)
        self.record('htk', result.htk)
        if self.app_data is not None:
            self.send(self.peer, mutual_auth.seal_app_data(self.session, self.app_data))
            self.record('sent', len(self.app_data))

    def on_app_data(self, msg):
        if self.session is None or self.session.state != mutual_auth.COMPLETE:
            return
        try:
            self.record('reply', mutual_auth.open_app_data(self.session, msg))
        except PrivDiscError as e:
            self.log.debug("simnet::%s dropped app data: %s", self.name, e)

    def tick(self, now):
        s = self.session
        if s is not None and s.state == mutual_auth.AWAIT_RESPONSE and self.stale(self.last):
            s.abort('timeout')
            self.record('state', s.state)
            self.record_abort('timeout')

    def session_state(self, session=None):
        if self.session is None:
            return {}
        return {'x': self.session.exponent}

    def session_key(self, session=None):
        if self.session is None or self.session.result is None:
            return None
        return self.session.result.atk


class AuthServer(Party):
    """Answers any number of handshakes, one ServerSession per sid."""

    mode = Enum(list(mutual_auth.MODES), default_value='cacheable')
    reply = Bytes(None, allow_none=True)
    server = Instance(mutual_auth.MutualAuthServer, allow_none=True)

    def __init__(self, name, **kwargs):
        super(AuthServer, self).__init__(name, **kwargs)
        self.sessions = OrderedDict()
        self.completed = 0

    def server_for(self, src):
        """the MutualAuthServer answering `src`, None to stay silent"""
        if self.server is None:
            self.server = mutual_auth.MutualAuthServer(
                parent=self, mode=self.mode, principal=self.principal, deployment=self.deployment
            )
        return self.server

    def _key(self, sid, field):
        return 'session.%s.%s' % (bytes(sid).hex(), field)

    def receive(self, src, data):
        msg = self.decode(data)
        if isinstance(msg, wire.M1):
            self.on_init(src, msg)
        elif isinstance(msg, wire.M3):
            self.on_finish(src, msg)
        elif isinstance(msg, wire.AppData):
            self.on_app_data(src, msg)

    def on_init(self, src, m1):
        sid = bytes(m1.sid)
        if sid in self.sessions:
            self.log.debug("simnet::%s ignored duplicate M1 %s", self.name, short_hex(sid))
            return
        server = self.server_for(src)
        if server is None:
            return
        session = server.session(self.entropy)
        self.sessions[sid] = [session, self.now, src]
        try:
            m2 = mutual_auth.server_respond(session, m1)
        except HandshakeAborted as e:
            self.record(self._key(sid, 'state'), session.state)
            self.record_abort('%s:%s' % (sid.hex(), e.reason))
            return
        self.record(self._key(sid, 'state'), session.state)
        self.send(src, m2)

    def on_finish(self, src, m3):
        sid = bytes(m3.sid)
        slot = self.sessions.get(sid)
        if slot is None or slot[0].state != mutual_auth.AWAIT_FINISH:
            return
        session = slot[0]
        slot[1] = self.now
        try:
            result = mutual_auth.server_process_finish(session, m3)
        except HandshakeAborted as e:
            self.record(self._key(sid, 'state'), session.state)
            self.record_abort('%s:%s' % (sid.hex(), e.reason))
            return
        self.completed += 1
        self.record('completed', self.completed)
        self.record(self._key(sid, 'state'), session.state)
        self.record(self._key(sid, 'peer'), result.peer_name)
        self.record(self._key(sid, 'atk'), result.atk)
        self.record(self._key(sid, 'htk'), result.htk)
        self.on_complete(src, session)

    def on_complete(self, src, session):
        pass

    def on_app_data(self, src, msg):
        slot = self.sessions.get(bytes(msg.sid))
        if slot is None or slot[0].state != mutual_auth.COMPLETE:
            return
        session = slot[0]
        try:
            data = mutual_auth.open_app_data(session, msg)
        except PrivDiscError as e:
            self.log.debug("simnet::%s dropped app data: %s", self.name, e)
            return
        self.record(self._key(session.sid, 'app_data'), data)
        if self.reply is not None:
            self.send(slot[2], mutual_auth.seal_app_data(session, self.reply))

    def tick(self, now):
        for sid, slot in self.sessions.items():
            session, last, _ = slot
            if session.state == mutual_auth.AWAIT_FINISH and self.stale(last):
                session.abort('timeout')
                self.record(self._key(sid, 'state'), session.state)
                self.record_abort('%s:timeout' % sid.hex())

    def _session(self, session):
        if session is None:
            if not self.sessions:
                return None
            return list(self.sessions.values())[-1][0]
        sid = bytes.fromhex(session) if isinstance(session, str) else bytes(session)
        slot = self.sessions.get(sid)
        return slot[0] if slot else None

    def session_state(self, session=None):
        s = self._session(session)
        return {} if s is None else {'y': s.exponent}

    def session_key(self, session=None):
        s = self._session(session)
        if s is None or s.result is None:
            return None
        return s.result.atk


# -----------------------------------------------------------------------------
# private discovery
# -----------------------------------------------------------------------------


class DiscoveryServer(Party):
    """Broadcasts to every endpoint on start and accepts 0-RTT flights."""

    policy = Unicode()
    ttl = Integer(discovery.DEFAULT_TTL)
    reply = Bytes(None, allow_none=True)

    advertiser = None

    def start(self):
        self.advertiser = discovery.Advertiser(
            parent=self,
            principal=self.principal,
            deployment=self.deployment,
            policy=PrefixPolicy.parse(self.policy),
            ttl=self.ttl,
            clock=self.unix_now,
        )
        self.rotate()

    def rotate(self):
        broadcast = self.advertiser.rotate(self.entropy)
        self.record('bid', broadcast.bid)
        self.record('expiry', broadcast.expiry)
        self.send(BROADCAST, broadcast)

    def receive(self, src, data):
        f1 = self.decode(data)
        if not isinstance(f1, wire.F1):
            return
        try:
            result = self.advertiser.accept(f1, self.reply, self.entropy)
        except HandshakeAborted as e:
            self.record_abort('%s:%s' % (bytes(f1.sid).hex(), e.reason))
            return
        prefix = 'accepted.%s.' % result.sid.hex()
        self.record(prefix + 'peer', result.peer_name)
        self.record(prefix + 'atk', result.atk)
        if result.early_data is not None:
            self.record(prefix + 'early_data', result.early_data)
        self.send(src, result.f2)

    def broadcast_secret(self, bid=None):
        state = self.advertiser.state if self.advertiser else None
        if state is None:
            return None
        if bid is not None and bytes.fromhex(bid) != state.bid:
            return None
        return state.s


class DiscoveryClient(Party):
    """Opens the first broadcast it can and connects with one 0-RTT flight."""

    early_data = Bytes(None, allow_none=True)

    session = None
    last = 0.0

    def receive(self, src, data):
        msg = self.decode(data)
        if isinstance(msg, wire.Broadcast):
            self.on_broadcast(src, msg)
        elif isinstance(msg, wire.F2):
            self.on_f2(msg)

    def on_broadcast(self, src, broadcast):
        if self.session is not None:
            return
        try:
            svc = discovery.process_broadcast(
                self.principal, self.deployment, broadcast, now=self.unix_now()
            )
            self.session, f1 = discovery.client_connect(
                self.principal, svc, self.early_data, self.entropy, now=self.unix_now()
            )
        except PrivDiscError as e:
            self.record('broadcast', type(e).__name__)
            self.record_abort('broadcast:%s' % type(e).__name__)
            return
        self.last = self.now
        self.record('broadcast', 'opened')
        self.record('server', svc.name)
        self.record('bid', svc.bid)
        self.record('sid', self.session.sid)
        self.record('state', self.session.state)
        self.send(src, f1)

    def on_f2(self, f2):
        if self.session is None or self.session.state != 'AwaitF2':
            return
        try:
            result = discovery.client_complete(self.session, f2)
        except HandshakeAborted as e:
            self.record('state', self.session.state)
            self.record_abort(e.reason)
            return
        self.record('state', self.session.state)
        self.record('atk', result.atk)
        if result.reply is not None:
            self.record('reply', result.reply)

    def tick(self, now):
        s = self.session
        if s is not None and s.state == 'AwaitF2' and self.stale(self.last):
            s.abort('timeout')
            self.record('state', s.state)
            self.record_abort('timeout')

    def session_state(self, session=None):
        if self.session is None:
            return {}
        return {'x': self.session.exponent}

    def session_key(self, session=None):
        if self.session is None or self.session.result is None:
            return None
        return self.session.result.atk


# -----------------------------------------------------------------------------
# AirDrop-style contact discovery
# -----------------------------------------------------------------------------


class AirDropSender(AuthClient):
    """Beacons the hash of its own name; on an Announce, runs the handshake
    and sends `app_data` (the file) under atk."""

    def start(self):
        self.send(BROADCAST, wire.Beacon(name_digest(self.principal.name)))
        self.record('state', 'Beaconing')

    def receive(self, src, data):
        msg = self.decode(data)
        if isinstance(msg, wire.Announce):
            if self.session is None:
                self.record('token', msg.token)
                self.begin(src)
        else:
            super(AirDropSender, self).receive(src, data)


class AirDropReceiver(AuthServer):
    """Answers beacons from its contacts only, encrypting its identity to
    the matched contact's name. Everyone else gets silence."""

    contacts = List(Unicode())

    def __init__(self, name, **kwargs):
        super(AirDropReceiver, self).__init__(name, **kwargs)
        self.matched = {}
        self.servers = {}

    def receive(self, src, data):
        msg = self.decode(data)
        if isinstance(msg, wire.Beacon):
            self.on_beacon(src, msg)
        else:
            super(AirDropReceiver, self).receive(src, data)

    def on_beacon(self, src, beacon):
        for contact in self.contacts:
            if name_digest(contact) == bytes(beacon.digest):
                self.matched[src] = contact
                self.record('matched', contact)
                self.send(src, wire.Announce(self.entropy.bytes(wire.TOKEN_BYTES)))
                return
        self.log.debug("simnet::%s no contact matches beacon from %s", self.name, src)

    def server_for(self, src):
        contact = self.matched.get(src)
        if contact is None:
            return None
        if contact not in self.servers:
            p = self.principal
            view = Principal(p.keypair, p.blessings, p.keyrings.values(), policy=contact)
            self.servers[contact] = mutual_auth.MutualAuthServer(
                parent=self, mode='cacheable', principal=view, deployment=self.deployment
            )
        return self.servers[contact]

    def on_app_data(self, src, msg):
        super(AirDropReceiver, self).on_app_data(src, msg)
        slot = self.sessions.get(bytes(msg.sid))
        key = self._key(msg.sid, 'app_data')
        if slot is not None and key in self.outputs:
            self.record('file', self.outputs[key])


# -----------------------------------------------------------------------------
# passive observers
# -----------------------------------------------------------------------------


class Eavesdropper(Party):
    """A tap: sees every transmission, is never delivered anything.

    ``watch`` registers byte strings to count in what it saw.
    """

    tap = True

    def __init__(self, name, **kwargs):
        super(Eavesdropper, self).__init__(name, **kwargs)
        self.seen = []
        self.needles = OrderedDict()

    def watch(self, label, needle):
        self.needles[label] = bytes(needle)

    def observe_entry(self, entry):
        self.seen.append(entry)

    def finish(self):
        self.record('frames', len(self.seen))
        for label, needle in self.needles.items():
            self.record('hits.%s' % label, transcript_scan(self.seen, needle))
