"""Principals, signing keys and blessings.

A *blessing* is a certificate chain. Each certificate names one component
(its *extension*) and binds it to a verification key; the blessing's name
is the extensions joined by ``/``. The first certificate is self-signed by
a root; every later one is signed by the key of the certificate before it.

Every signed payload is

    TLV(algorithm, context label, signer public key, message)

so that a signature from one context (a certificate, a broadcast, a
handshake) never verifies in another, and a signature is tied to the key
that made it.

Each certificate also signs a digest of the chain before it, so a
certificate cannot be spliced onto a different parent chain.
"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric import ec
from traitlets.log import get_logger

from privdisc.crypto.entropy import resolve
from privdisc.crypto.ibe import ibe_setup
from privdisc.crypto.kdf import tagged_hash
from privdisc.crypto.kdf import TAG_BLESSING
from privdisc.crypto.kdf import TAG_CHAIN
from privdisc.crypto.pairing import load_group
from privdisc.crypto.prefix import check_component
from privdisc.crypto.prefix import HierName
from privdisc.crypto.prefix import keyring_extract
from privdisc.crypto.prefix import PrefixPolicy
from privdisc.crypto.prefix import satisfies
from privdisc.error import BadSignature
from privdisc.error import BrokenLinkError
from privdisc.error import ChainError
from privdisc.error import InvalidNameError
from privdisc.error import MalformedError
from privdisc.error import TruncatedError
from privdisc.error import UntrustedRootError
from privdisc.serialize import tlv

ALG_ECDSA_P256 = 1
ALGORITHMS = {ALG_ECDSA_P256: 'ecdsa-p256-sha256'}

PUBLIC_KEY_BYTES = 33
SECRET_KEY_BYTES = 32
MAX_SIGNATURE_BYTES = 72
ZERO_DIGEST = bytes(32)

_CURVE = ec.SECP256R1()
_ORDER = 0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551

# signature context labels
LABEL_CERTIFICATE = b'privdisc/certificate'
LABEL_BROADCAST = b'privdisc/broadcast'
LABEL_SIGMA_SERVER = b'privdisc/sigma/server'
LABEL_SIGMA_CLIENT = b'privdisc/sigma/client'
LABEL_0RTT_CLIENT = b'privdisc/0rtt/client'


# -----------------------------------------------------------------------------
# signing keys
# -----------------------------------------------------------------------------


def _signed_payload(algorithm, label, public, message):
    return tlv.encode(
        (0x01, tlv.uint_bytes(algorithm, 1)),
        (0x02, label),
        (0x03, public),
        (0x04, message),
    )


def _ecdsa():
    return ec.ECDSA(hashes.SHA256(), deterministic_signing=True)


def load_public_key(data):
    data = bytes(data)
    if len(data) != PUBLIC_KEY_BYTES:
        raise MalformedError("verification key must be %i bytes" % PUBLIC_KEY_BYTES)
    try:
        return ec.EllipticCurvePublicKey.from_encoded_point(_CURVE, data)
    except ValueError as e:
        raise MalformedError("invalid verification key: %s" % e)


class SigningKeyPair(object):
    """An ECDSA P-256 key pair with deterministic (RFC 6979) signatures.

    ``public`` is the 33-byte compressed verification key.
    """

    algorithm = ALG_ECDSA_P256

    def __init__(self, secret):
        self.secret = secret
        self.public = secret.public_key().public_bytes(
            serialization.Encoding.X962, serialization.PublicFormat.CompressedPoint
        )

    @classmethod
    def generate(cls, entropy=None):
        return cls(ec.derive_private_key(resolve(entropy).scalar(_ORDER), _CURVE))

    @classmethod
    def from_secret_bytes(cls, data):
        data = bytes(data)
        if len(data) != SECRET_KEY_BYTES:
            raise MalformedError("signing key must be %i bytes" % SECRET_KEY_BYTES)
        value = int.from_bytes(data, 'big')
        if not 0 < value < _ORDER:
            raise MalformedError("signing key out of range")
        return cls(ec.derive_private_key(value, _CURVE))

    def secret_bytes(self):
        return self.secret.private_numbers().private_value.to_bytes(SECRET_KEY_BYTES, 'big')

    def sign(self, label, message):
        payload = _signed_payload(self.algorithm, label, self.public, message)
        return self.secret.sign(payload, _ecdsa())

    def __repr__(self):
        return "<SigningKeyPair %s>" % self.public[:6].hex()


def verify(key, label, message, signature, algorithm=ALG_ECDSA_P256):
    """True iff `signature` is `key`'s signature on (label, message)."""
    if algorithm not in ALGORITHMS:
        return False
    try:
        public = load_public_key(key)
        public.verify(
            bytes(signature), _signed_payload(algorithm, label, key, message), _ecdsa()
        )
    except (InvalidSignature, MalformedError, ValueError):
        return False
    return True


def sign(principal, label, message):
    return principal.keypair.sign(label, message)


def check_signature(key, label, message, signature):
    if not verify(key, label, message, signature):
        raise BadSignature("bad %s signature" % label.decode('ascii', 'replace'))


# -----------------------------------------------------------------------------
# certificates and blessings
# -----------------------------------------------------------------------------


class Certificate(object):
    __slots__ = ('extension', 'algorithm', 'subject_public', 'signature')

    def __init__(self, extension, subject_public, signature, algorithm=ALG_ECDSA_P256):
        self.extension = extension
        self.algorithm = algorithm
        self.subject_public = bytes(subject_public)
        self.signature = bytes(signature)

    def encode(self):
        return tlv.encode(
            (0x01, self.extension.encode('utf8')),
            (0x02, tlv.uint_bytes(self.algorithm, 1)),
            (0x03, self.subject_public),
            (0x04, self.signature),
        )

    @classmethod
    def decode(cls, data):
        r = tlv.Reader(data, 'certificate')
        extension = r.str(0x01)
        algorithm = r.uint(0x02, 1)
        subject_public = r.expect(0x03, PUBLIC_KEY_BYTES)
        signature = r.expect(0x04)
        r.done()
        try:
            check_component(extension)
        except InvalidNameError as e:
            raise MalformedError("certificate: %s" % e)
        if len(signature) > MAX_SIGNATURE_BYTES:
            raise MalformedError("certificate: signature too long")
        return cls(extension, subject_public, signature, algorithm)

    def __eq__(self, other):
        if not isinstance(other, Certificate):
            return NotImplemented
        return self.encode() == other.encode()

    def __hash__(self):
        return hash(self.encode())

    def __repr__(self):
        return "<Certificate %s %s>" % (self.extension, self.subject_public[:6].hex())


def _chain_digest(chain):
    if not chain:
        return ZERO_DIGEST
    return tagged_hash(TAG_CHAIN, *(c.encode() for c in chain))


def _certificate_message(extension, algorithm, subject_public, parent_digest):
    return tlv.encode(
        (0x01, extension.encode('utf8')),
        (0x02, tlv.uint_bytes(algorithm, 1)),
        (0x03, subject_public),
        (0x04, parent_digest),
    )


def _certify(issuer_keypair, parent_chain, subject_public, extension):
    check_component(extension)
    message = _certificate_message(
        extension, issuer_keypair.algorithm, subject_public, _chain_digest(parent_chain)
    )
    signature = issuer_keypair.sign(LABEL_CERTIFICATE, message)
    return Certificate(extension, subject_public, signature, issuer_keypair.algorithm)


class Blessing(object):
    """A certificate chain binding a hierarchical name to a key."""

    __slots__ = ('chain',)

    def __init__(self, chain):
        chain = tuple(chain)
        if not chain:
            raise MalformedError("a blessing needs at least one certificate")
        self.chain = chain

    @property
    def name(self):
        return HierName(c.extension for c in self.chain)

    @property
    def public_key(self):
        return self.chain[-1].subject_public

    @property
    def root_key(self):
        return self.chain[0].subject_public

    def __len__(self):
        return len(self.chain)

    def truncate(self, n):
        return Blessing(self.chain[:n])

    def encode(self):
        w = tlv.Writer()
        w.add_uint(0x01, len(self.chain), 1)
        for cert in self.chain:
            w.add(0x02, cert.encode())
        return w.getvalue()

    @classmethod
    def decode(cls, data):
        r = tlv.Reader(data, 'blessing')
        count = r.uint(0x01, 1)
        certs = [Certificate.decode(c) for c in r.repeated(0x02)]
        r.done()
        if not certs:
            raise MalformedError("blessing: empty chain")
        if len(certs) != count:
            raise TruncatedError("blessing: %i of %i certificates" % (len(certs), count))
        try:
            # validates component count
            HierName(c.extension for c in certs)
        except InvalidNameError as e:
            raise MalformedError("blessing: %s" % e)
        return cls(certs)

    def digest(self):
        """what handshakes exchange instead of the full blessing"""
        return tagged_hash(TAG_BLESSING, self.encode())

    def __eq__(self, other):
        if not isinstance(other, Blessing):
            return NotImplemented
        return self.chain == other.chain

    def __hash__(self):
        return hash(self.chain)

    def __repr__(self):
        return "<Blessing %s>" % self.name


class TrustAnchors(object):
    """Trusted root keys, with the root name each was configured under."""

    def __init__(self, records=()):
        self.records = []
        for name, key in records:
            self.add(name, key)

    def add(self, name, key):
        key = bytes(key)
        if len(key) != PUBLIC_KEY_BYTES:
            raise MalformedError("trust anchor key must be %i bytes" % PUBLIC_KEY_BYTES)
        if key not in self:
            self.records.append((str(name), key))

    def __contains__(self, key):
        return any(k == bytes(key) for _, k in self.records)

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def keys(self):
        return {k for _, k in self.records}

    def encode(self):
        w = tlv.Writer()
        w.add_uint(0x01, len(self.records), 2)
        for name, key in self.records:
            w.add(0x02, tlv.encode((0x01, name.encode('utf8')), (0x02, key)))
        return w.getvalue()

    @classmethod
    def decode(cls, data):
        r = tlv.Reader(data, 'trust anchors')
        count = r.uint(0x01, 2)
        records = []
        for body in r.repeated(0x02):
            rr = tlv.Reader(body, 'trust anchor')
            records.append((rr.str(0x01), rr.expect(0x02, PUBLIC_KEY_BYTES)))
            rr.done()
        r.done()
        if len(records) != count:
            raise TruncatedError("trust anchors: %i of %i records" % (len(records), count))
        return cls(records)


def validate_chain(blessing, roots):
    """Validate `blessing` link by link and return its name.

    `roots` is a TrustAnchors or any collection of root verification keys.
    """
    chain = blessing.chain
    for i, cert in enumerate(chain):
        if cert.algorithm not in ALGORITHMS:
            raise ChainError("certificate %i: unsupported algorithm %i" % (i, cert.algorithm))
        issuer = chain[i - 1].subject_public if i else cert.subject_public
        message = _certificate_message(
            cert.extension, cert.algorithm, cert.subject_public, _chain_digest(chain[:i])
        )
        if not verify(issuer, LABEL_CERTIFICATE, message, cert.signature, cert.algorithm):
            raise BrokenLinkError("certificate %i (%s) does not verify" % (i, cert.extension))
    if blessing.root_key not in roots:
        raise UntrustedRootError("untrusted root %s" % chain[0].extension)
    return blessing.name


# -----------------------------------------------------------------------------
# principals
# -----------------------------------------------------------------------------


class Principal(object):
    """A signing key with its blessings, prefix keyrings and local policy.

    Parameters
    ----------
    keypair : SigningKeyPair
    blessings : list of Blessing
    keyrings : list of PrefixKeyRing
        keyrings for (some of) the blessing names
    policy : PrefixPolicy, optional
        who this principal is willing to talk to
    """

    def __init__(self, keypair, blessings=(), keyrings=(), policy=None):
        self.keypair = keypair
        self.blessings = []
        self.keyrings = {}
        self.policy = PrefixPolicy.parse(policy) if policy is not None else None
        self.log = get_logger()
        for b in blessings:
            self.blessings.append(b)
        for ring in keyrings:
            self.add_keyring(ring)

    @property
    def public(self):
        return self.keypair.public

    @property
    def blessing(self):
        """the default (first) blessing"""
        if not self.blessings:
            return None
        return self.blessings[0]

    @property
    def name(self):
        b = self.blessing
        return b.name if b is not None else None

    def add_blessing(self, blessing, keyring=None):
        if blessing.public_key != self.public:
            raise ChainError("blessing %s is for another key" % blessing.name)
        self.blessings.append(blessing)
        if keyring is not None:
            if keyring.name != blessing.name:
                raise ValueError(
                    "keyring for %s does not match blessing %s" % (keyring.name, blessing.name)
                )
            self.add_keyring(keyring)
        return blessing

    def add_keyring(self, keyring):
        self.keyrings[keyring.name] = keyring

    def keyring_for(self, blessing):
        return self.keyrings.get(blessing.name)

    def blessing_for(self, policy):
        """the first blessing (with a keyring) whose name satisfies `policy`"""
        for b in self.blessings:
            if b.name in self.keyrings and satisfies(b.name, policy):
                return b
        return None

    def accepts(self, name):
        """local authorization: no policy means accept any validated name"""
        if self.policy is None:
            return True
        return satisfies(name, self.policy)

    def sign(self, label, message):
        return self.keypair.sign(label, message)

    def __repr__(self):
        return "<%s %s>" % (self.__class__.__name__, self.name)


class IdentityProvider(Principal):
    """A root principal that is also the IBE root of its namespace."""

    def __init__(self, keypair, master, blessings=(), keyrings=(), policy=None):
        super(IdentityProvider, self).__init__(keypair, blessings, keyrings, policy)
        self.master = master

    @property
    def mpk(self):
        return self.master.mpk

    def anchors(self):
        return TrustAnchors([(str(self.name), self.public)])

    def deployment(self):
        return Deployment(self.mpk, self.anchors())

    def issue(self, subject_public, name, entropy=None):
        """(blessing, keyring) binding `name` to `subject_public`.

        `name` must extend the root name. Intermediate components are
        certified to the provider's own key.
        """
        name = HierName.parse(name)
        root = self.blessing
        if not root.name.is_prefix_of(name) or name == root.name:
            raise InvalidNameError("%s is not below %s" % (name, root.name))
        chain = list(root.chain)
        for i, component in enumerate(name.components[len(root.chain) :]):
            last = len(root.chain) + i == len(name) - 1
            subject = subject_public if last else self.public
            chain.append(_certify(self.keypair, chain, subject, component))
        blessing = Blessing(chain)
        keyring = keyring_extract(self.master, name, entropy)
        self.log.debug("idp::issued %s", name)
        return blessing, keyring

    def enroll(self, principal, name, entropy=None):
        """issue `name` to `principal` and add it to its blessings"""
        blessing, keyring = self.issue(principal.public, name, entropy)
        return principal.add_blessing(blessing, keyring)


class Deployment(object):
    """The one (mpk, trust anchors) pair a deployment is configured with."""

    def __init__(self, mpk, anchors):
        self.mpk = mpk
        self.anchors = anchors

    @property
    def group(self):
        return load_group(self.mpk.curve_id)

    @property
    def curve(self):
        return self.mpk.curve_id

    def validate(self, blessing):
        return validate_chain(blessing, self.anchors)


def new_root(name_component, entropy=None, group=None):
    """A self-signed IdentityProvider that also holds a fresh MasterKeyPair."""
    entropy = resolve(entropy)
    check_component(name_component)
    keypair = SigningKeyPair.generate(entropy)
    master = ibe_setup(group or load_group(), entropy)
    root = Blessing([_certify(keypair, (), keypair.public, name_component)])
    ring = keyring_extract(master, root.name, entropy)
    return IdentityProvider(keypair, master, [root], [ring])


def bless(issuer, subject_public, extension, blessing=None):
    """Extend `issuer`'s blessing (default: its first) to `subject_public`."""
    parent = blessing or issuer.blessing
    if parent is None:
        raise ChainError("%r has no blessing to extend" % issuer)
    if parent.public_key != issuer.public:
        raise ChainError("blessing %s does not belong to the issuer" % parent.name)
    cert = _certify(issuer.keypair, parent.chain, subject_public, extension)
    return Blessing(parent.chain + (cert,))
