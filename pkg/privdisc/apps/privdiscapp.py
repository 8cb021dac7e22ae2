#!/usr/bin/env python
# encoding: utf-8
"""
The privdisc command-line application.
"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
import hashlib
import os
import sys

import zmq
from traitlets import Bool
from traitlets import Dict
from traitlets import Enum
from traitlets import Integer
from traitlets import Unicode

from privdisc._version import __version__
from privdisc.apps import bench
from privdisc.apps.baseapp import base_aliases
from privdisc.apps.baseapp import base_flags
from privdisc.apps.baseapp import BasePrivDiscApplication
from privdisc.crypto.pairing import CURVES
from privdisc.crypto.pairing import DEFAULT_CURVE
from privdisc.crypto.pairing import load_group
from privdisc.crypto.prefix import PrefixPolicy
from privdisc.error import EXIT_NOT_AUTHORIZED
from privdisc.error import NotAuthorized
from privdisc.principals import Deployment
from privdisc.principals import IdentityProvider
from privdisc.principals import new_root
from privdisc.principals import Principal
from privdisc.principals import SigningKeyPair
from privdisc.protocol import discovery
from privdisc.serialize import advert
from privdisc.serialize import wire
from privdisc.simnet.scenarios import build_world
from privdisc.util import format_unix
from privdisc.util import parse_date
from privdisc.util import read_file
from privdisc.util import short_hex
from privdisc.util import write_private_file

# -----------------------------------------------------------------------------
# Key directory layout
# -----------------------------------------------------------------------------

MPK_FILE = 'mpk.pds'
ANCHORS_FILE = 'anchors.pds'
IDP_MASTER_FILE = 'idp-master.pds'
IDP_LABEL = 'idp'

CONNECT_URL = 'inproc://privdisc-connect'

_description = """Private mutual authentication and private service discovery.

Key material lives in $PRIVDISC_HOME (default ~/.privdisc), one canonical
wire frame per file. Exit codes: 0 success, 2 malformed input, 3 not
authorized, 4 expired, 5 cryptographic failure, 1 anything else.
"""

_examples = """
privdisc idp init --root=dev.v.io
privdisc keygen --label=tv
privdisc idp issue --name=dev.v.io/u/Alice/Devices/TV --pubkey=~/.privdisc/tv.pub
privdisc advertise --principal=tv --policy=dev.v.io/u/Alice --out=tv.bcast
privdisc discover --principal=phone --in=tv.bcast
privdisc connect --server=tv --client=phone --policy=dev.v.io/u/Alice
privdisc bench ibe
"""


def key_file(label, kind):
    return '%s.%s' % (label, kind)


def atk_digest(atk):
    return hashlib.sha256(atk).hexdigest()[:16]


class PrincipalApplication(BasePrivDiscApplication):
    """Base for commands acting as a principal of an existing deployment."""

    def load_deployment(self):
        mpk = self.load(MPK_FILE, expect=wire.T_MPK)
        anchors = self.load(ANCHORS_FILE, expect=wire.T_TRUST_ANCHORS)
        return Deployment(mpk, anchors)

    def load_principal(self, label, deployment, policy=None):
        keypair = self.load(key_file(label, 'key'), expect=wire.T_SIGNING_KEY)
        blessing = self.load(key_file(label, 'blessing'), expect=wire.T_BLESSING)
        keyring = self.load(
            key_file(label, 'keyring'), expect=wire.T_KEYRING, mpk=deployment.mpk
        )
        principal = Principal(keypair, policy=policy or None)
        principal.add_blessing(blessing, keyring)
        return principal

    def load_idp(self):
        deployment = self.load_deployment()
        master = self.load(IDP_MASTER_FILE, expect=wire.T_MASTER_KEY)
        principal = self.load_principal(IDP_LABEL, deployment)
        return IdentityProvider(
            principal.keypair, master, principal.blessings, principal.keyrings.values()
        )


# -----------------------------------------------------------------------------
# keygen
# -----------------------------------------------------------------------------

keygen_aliases = dict(label='KeygenApp.label')
keygen_aliases.update(base_aliases)
keygen_flags = dict(force=({'KeygenApp': {'force': True}}, "overwrite existing key files"))
keygen_flags.update(base_flags)


class KeygenApp(PrincipalApplication):
    name = u'privdisc-keygen'
    description = """Generate a principal's signing key pair.

    Writes <label>.key (secret) and <label>.pub (public, to hand to the
    identity provider) into the key directory."""

    label = Unicode('principal', config=True, help="file name stem for the key pair")
    force = Bool(False, config=True, help="overwrite existing key files")

    aliases = Dict(keygen_aliases)
    flags = Dict(keygen_flags)

    def run(self):
        keypair = SigningKeyPair.generate()
        self.save(key_file(self.label, 'key'), keypair, overwrite=self.force)
        path = self.save(key_file(self.label, 'pub'), wire.PublicKey(keypair.public), self.force)
        print(path)


# -----------------------------------------------------------------------------
# idp
# -----------------------------------------------------------------------------

idp_init_aliases = dict(root='IdpInitApp.root', curve='IdpInitApp.curve')
idp_init_aliases.update(base_aliases)


class IdpInitApp(PrincipalApplication):
    name = u'privdisc-idp-init'
    description = """Create an identity provider: IBE master keys, a root
    blessing and the deployment's public files (mpk and trust anchors)."""

    root = Unicode(u'', config=True, help="single-component root name, e.g. dev.v.io")
    curve = Enum(sorted(CURVES), default_value=DEFAULT_CURVE, config=True, help="pairing curve")

    aliases = Dict(idp_init_aliases)

    def run(self):
        if not self.root:
            raise ValueError("--root is required")
        for filename in (MPK_FILE, ANCHORS_FILE, IDP_MASTER_FILE):
            if os.path.exists(self.path(filename)):
                raise FileExistsError(self.path(filename))
        idp = new_root(self.root, group=load_group(self.curve))
        self.save(IDP_MASTER_FILE, idp.master)
        self.save(key_file(IDP_LABEL, 'key'), idp.keypair)
        self.save(key_file(IDP_LABEL, 'blessing'), idp.blessing)
        self.save(key_file(IDP_LABEL, 'keyring'), idp.keyring_for(idp.blessing))
        self.save(MPK_FILE, idp.mpk)
        self.save(ANCHORS_FILE, idp.anchors())
        print("%s on %s" % (idp.name, self.curve))


idp_issue_aliases = dict(
    name='IdpIssueApp.subject', pubkey='IdpIssueApp.pubkey', label='IdpIssueApp.label'
)
idp_issue_aliases.update(base_aliases)
idp_issue_flags = dict(
    force=({'IdpIssueApp': {'force': True}}, "overwrite an existing blessing and keyring")
)
idp_issue_flags.update(base_flags)


class IdpIssueApp(PrincipalApplication):
    name = u'privdisc-idp-issue'
    description = """Issue a blessing and its prefix keyring for a public key.

    Writes <label>.blessing and <label>.keyring; the label defaults to the
    public key's file name stem."""

    subject = Unicode(u'', config=True, help="hierarchical name to issue")
    pubkey = Unicode(u'', config=True, help="public key file from 'privdisc keygen'")
    label = Unicode(u'', config=True, help="file name stem for the outputs")
    force = Bool(False, config=True)

    aliases = Dict(idp_issue_aliases)
    flags = Dict(idp_issue_flags)

    def run(self):
        if not (self.subject and self.pubkey):
            raise ValueError("--name and --pubkey are required")
        pubkey = os.path.expanduser(self.pubkey)
        public = wire.decode(read_file(pubkey), expect=wire.T_PUBLIC_KEY).key
        label = self.label or os.path.splitext(os.path.basename(pubkey))[0]
        idp = self.load_idp()
        blessing, keyring = idp.issue(public, self.subject)
        self.save(key_file(label, 'blessing'), blessing, overwrite=self.force)
        self.save(key_file(label, 'keyring'), keyring, overwrite=self.force)
        print("%s: %i IBE keys" % (blessing.name, len(keyring.keys)))


class IdpApp(BasePrivDiscApplication):
    name = u'privdisc-idp'
    description = "Identity provider commands."

    subcommands = {
        'init': (IdpInitApp, IdpInitApp.description.splitlines()[0]),
        'issue': (IdpIssueApp, IdpIssueApp.description.splitlines()[0]),
    }

    aliases = Dict()
    flags = Dict()

    def start(self):
        if self.subapp is None:
            print("No subcommand specified. Must specify one of: 'init', 'issue'")
            print()
            self.print_subcommands()
            self.exit(1)
        return self.subapp.start()


# -----------------------------------------------------------------------------
# advertise / discover / connect
# -----------------------------------------------------------------------------

advertise_aliases = dict(
    principal='AdvertiseApp.principal',
    policy='AdvertiseApp.policy',
    ttl='AdvertiseApp.ttl',
    out='AdvertiseApp.out',
    txt='AdvertiseApp.txt',
)
advertise_aliases.update(base_aliases)


class AdvertiseApp(PrincipalApplication):
    name = u'privdisc-advertise'
    description = """Sign and prefix-encrypt a broadcast for a policy.

    Writes the Broadcast frame to --out (stdout by default) and reports
    its size against the single mDNS response budget. Each run takes the
    next broadcast counter from <principal>.counter."""

    principal = Unicode(u'principal', config=True, help="label of the advertising principal")
    policy = Unicode(u'', config=True, help="comma-separated name prefixes allowed to see it")
    ttl = Integer(discovery.DEFAULT_TTL, config=True, help="broadcast lifetime in seconds")
    out = Unicode(u'-', config=True, help="output file, - for stdout")
    txt = Unicode(u'', config=True, help="also write the mDNS TXT form (key=value lines)")

    aliases = Dict(advertise_aliases)

    def next_counter(self):
        """bump and persist the principal's broadcast counter"""
        path = self.path(key_file(self.principal, 'counter'))
        last = int(read_file(path)) if os.path.exists(path) else 0
        counter = last + 1
        write_private_file(path, b'%i\n' % counter, overwrite=True)
        self.log.debug("advertise::counter %s -> %i", path, counter)
        return counter

    def run(self):
        if not self.policy:
            raise ValueError("--policy is required")
        deployment = self.load_deployment()
        server = self.load_principal(self.principal, deployment, self.policy)
        broadcast, _ = discovery.make_broadcast(
            server, deployment, self.policy, self.ttl, counter=self.next_counter()
        )
        data = wire.encode(broadcast)
        self.write_output(self.out, data)
        self.log.info(
            "advertise::broadcast %s expires %s",
            short_hex(broadcast.bid),
            format_unix(broadcast.expiry),
        )
        verdict = 'PASS' if len(data) <= advert.ADVERT_BUDGET else 'FAIL'
        report = sys.stderr if self.out in ('', '-') else sys.stdout
        print(
            "broadcast: %i bytes, budget %i: %s" % (len(data), advert.ADVERT_BUDGET, verdict),
            file=report,
        )
        if self.txt:
            txt = advert.to_mdns_txt(broadcast)
            with open(self.txt, 'w') as f:
                for key, value in txt.items():
                    f.write('%s=%s\n' % (key, value))
            self.log.info("Wrote %s (%i TXT strings)", self.txt, len(txt))


discover_aliases = dict(
    principal='DiscoverApp.principal',
    accept='DiscoverApp.accept',
    now='DiscoverApp.now',
)
discover_aliases['in'] = 'DiscoverApp.input'
discover_aliases.update(base_aliases)


class DiscoverApp(PrincipalApplication):
    name = u'privdisc-discover'
    description = """Open a broadcast: prints the server's name, or
    'not authorized' (exit 3) if none of our names satisfies its policy."""

    principal = Unicode(u'principal', config=True, help="label of the discovering principal")
    accept = Unicode(u'', config=True, help="prefixes of servers we accept (default: any)")
    input = Unicode(u'-', config=True, help="broadcast file, - for stdin")
    now = Unicode(
        u'', config=True, help="evaluate expiry at this time (ISO-8601 or unix seconds)"
    )

    aliases = Dict(discover_aliases)

    def run(self):
        deployment = self.load_deployment()
        client = self.load_principal(self.principal, deployment, self.accept)
        data = self.read_input(self.input)
        now = parse_date(self.now) if self.now else None
        try:
            svc = discovery.process_broadcast(client, deployment, data, now=now)
        except NotAuthorized as e:
            self.log.debug("discover::%s", e)
            print("not authorized")
            self.exit(EXIT_NOT_AUTHORIZED)
        print(svc.name)


connect_aliases = dict(
    server='ConnectApp.server',
    client='ConnectApp.client',
    policy='ConnectApp.policy',
    accept='ConnectApp.accept',
    reply='ConnectApp.reply',
)
connect_aliases['early-data'] = 'ConnectApp.early_data'
connect_aliases.update(base_aliases)


class ConnectApp(PrincipalApplication):
    name = u'privdisc-connect'
    description = """Run discovery and the 0-RTT exchange between two local
    principals over an in-process pipe; prints both sides' atk digests."""

    server = Unicode(u'server', config=True, help="label of the advertising principal")
    client = Unicode(u'principal', config=True, help="label of the connecting principal")
    policy = Unicode(u'', config=True, help="broadcast policy, also the server's policy")
    accept = Unicode(u'', config=True, help="client-side server policy (default: any)")
    early_data = Unicode(u'', config=True, help="file sent as 0-RTT early data")
    reply = Unicode(u'', config=True, help="text the server sends back under atk")

    aliases = Dict(connect_aliases)

    def run(self):
        if not self.policy:
            raise ValueError("--policy is required")
        deployment = self.load_deployment()
        server = self.load_principal(self.server, deployment, self.policy)
        client = self.load_principal(self.client, deployment, self.accept)
        early = read_file(os.path.expanduser(self.early_data)) if self.early_data else None
        reply = self.reply.encode('utf8') if self.reply else None

        advertiser = discovery.Advertiser(
            parent=self,
            principal=server,
            deployment=deployment,
            policy=PrefixPolicy.parse(self.policy),
        )
        ctx = zmq.Context()
        server_sock = ctx.socket(zmq.PAIR)
        client_sock = ctx.socket(zmq.PAIR)
        try:
            server_sock.bind(CONNECT_URL)
            client_sock.connect(CONNECT_URL)

            server_sock.send(wire.encode(advertiser.rotate()))
            try:
                svc = discovery.process_broadcast(client, deployment, client_sock.recv())
            except NotAuthorized as e:
                self.log.debug("connect::%s", e)
                print("not authorized")
                self.exit(EXIT_NOT_AUTHORIZED)
            session, f1 = discovery.client_connect(client, svc, early)
            client_sock.send(wire.encode(f1))

            f1 = wire.decode(server_sock.recv(), expect=wire.T_F1)
            accepted = advertiser.accept(f1, reply)
            server_sock.send(wire.encode(accepted.f2))

            f2 = wire.decode(client_sock.recv(), expect=wire.T_F2)
            done = discovery.client_complete(session, f2)
        finally:
            client_sock.close(linger=0)
            server_sock.close(linger=0)
            ctx.term()

        print("server %s" % done.peer_name)
        print("client %s" % accepted.peer_name)
        if accepted.early_data is not None:
            print("early data %i bytes" % len(accepted.early_data))
        if done.reply is not None:
            print("reply %s" % done.reply.decode('utf8', 'replace'))
        print("server atk %s" % atk_digest(accepted.atk))
        print("client atk %s" % atk_digest(done.atk))
        print("atk match %s" % ('yes' if accepted.atk == done.atk else 'no'))


# -----------------------------------------------------------------------------
# bench
# -----------------------------------------------------------------------------

BENCH_ROOT = 'bench.example'
BENCH_SERVER = 'bench.example/services/printer'
BENCH_CLIENT = 'bench.example/users/alice'


class BenchmarkApplication(BasePrivDiscApplication):
    """Shared options of the bench subcommands."""

    iterations = Integer(50, config=True, help="timed iterations per row (median reported)")
    curve = Enum(sorted(CURVES), default_value=DEFAULT_CURVE, config=True, help="pairing curve")

    def write_rows(self, rows):
        sys.stdout.write(bench.format_tsv(rows))
        sys.stdout.flush()


bench_ibe_aliases = dict(iterations='BenchIbeApp.iterations', curve='BenchIbeApp.curve')
bench_ibe_aliases.update(base_aliases)


class BenchIbeApp(BenchmarkApplication):
    name = u'privdisc-bench-ibe'
    description = "IBE micro-benchmarks: Pairing, Encrypt, Decrypt, Extract."

    aliases = Dict(bench_ibe_aliases)

    def run(self):
        self.write_rows(bench.bench_ibe(load_group(self.curve), self.iterations))


bench_handshake_aliases = dict(
    iterations='BenchHandshakeApp.iterations', curve='BenchHandshakeApp.curve'
)
bench_handshake_aliases.update(base_aliases)


class BenchHandshakeApp(BenchmarkApplication):
    name = u'privdisc-bench-handshake'
    description = """SIGMA-I against private mutual authentication, with the
    server ciphertext precomputed."""

    iterations = Integer(20, config=True, help="timed handshakes per row (median reported)")

    aliases = Dict(bench_handshake_aliases)

    def run(self):
        world = build_world(
            'bench',
            BENCH_ROOT,
            [BENCH_SERVER, BENCH_CLIENT],
            policies={BENCH_SERVER: 'bench.example/users'},
            group=load_group(self.curve),
        )
        rows = bench.bench_handshake(
            world.principals[BENCH_CLIENT],
            world.principals[BENCH_SERVER],
            world.deployment,
            self.iterations,
        )
        self.write_rows(rows)


class BenchApp(BasePrivDiscApplication):
    name = u'privdisc-bench'
    description = "Micro-benchmarks; TSV with a header row on stdout."

    subcommands = {
        'ibe': (BenchIbeApp, BenchIbeApp.description),
        'handshake': (BenchHandshakeApp, "SIGMA-I against private mutual authentication."),
    }

    aliases = Dict()
    flags = Dict()

    def start(self):
        if self.subapp is None:
            print("No subcommand specified. Must specify one of: 'ibe', 'handshake'")
            self.exit(1)
        return self.subapp.start()


# -----------------------------------------------------------------------------
# the main application
# -----------------------------------------------------------------------------


class PrivDiscApp(BasePrivDiscApplication):
    name = u'privdisc'
    description = _description
    examples = _examples
    version = __version__

    subcommands = {
        'keygen': (KeygenApp, "Generate a principal's signing key pair."),
        'idp': (IdpApp, "Identity provider: init, issue."),
        'advertise': (AdvertiseApp, "Write a prefix-encrypted broadcast."),
        'discover': (DiscoverApp, "Open a broadcast."),
        'connect': (ConnectApp, "Discovery plus the 0-RTT exchange over a local pipe."),
        'bench': (BenchApp, "Benchmarks: ibe, handshake."),
    }

    # no aliases or flags for parent App
    aliases = Dict()
    flags = Dict()

    def start(self):
        if self.subapp is None:
            keys = ', '.join("'{}'".format(key) for key in self.subcommands.keys())
            print("No subcommand specified. Must specify one of: %s" % keys)
            print()
            self.print_description()
            self.print_subcommands()
            self.exit(1)
        else:
            return self.subapp.start()


launch_new_instance = PrivDiscApp.launch_instance

if __name__ == '__main__':
    launch_new_instance()
