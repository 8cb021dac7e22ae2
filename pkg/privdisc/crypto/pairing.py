"""Pairing-friendly groups.

:class:`GroupParams` hides the curve behind a small interface (scalar
multiplication in the two source groups, the pairing, exponentiation in the
target group, and compressed encodings with validation), so the curve is a
configuration choice rather than a code change.

Three curves are supported. Two run in pure Python through :mod:`py_ecc`:

``bls12_381``
    the default when charm is missing; 48-byte G1 and 96-byte G2 points
    using the library's own point compression.
``bn254``
    compatibility with bn256-era deployments; 32-byte G1 and 64-byte G2
    points. The pairing library ships no compression for this curve, so it
    is implemented here (square roots in Fq and Fq2).

The third runs in C, through charm-crypto and the PBC library:

``pbc_bn254``
    the default when charm is installed. Pairings are two to three orders
    of magnitude faster than in py_ecc.

Points are kept in the library's projective representation. Only the
encodings are canonical; compare points with :meth:`GroupParams.eq` or by
encoding.
"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
import base64
from functools import lru_cache

from py_ecc import optimized_bls12_381 as _bls
from py_ecc import optimized_bn128 as _bn
from py_ecc.bls.point_compression import compress_G1
from py_ecc.bls.point_compression import compress_G2
from py_ecc.bls.point_compression import decompress_G1
from py_ecc.bls.point_compression import decompress_G2

try:
    from charm.toolbox.pairinggroup import G1
    from charm.toolbox.pairinggroup import G2
    from charm.toolbox.pairinggroup import GT
    from charm.toolbox.pairinggroup import pair as _charm_pair
    from charm.toolbox.pairinggroup import PairingGroup
    from charm.toolbox.pairinggroup import ZR
except ImportError:
    PairingGroup = None

from privdisc.error import MalformedError


class GroupParams(object):
    """An asymmetric pairing group e: G1 x G2 -> GT of prime order p.

    Attributes
    ----------
    curve_id : str
    p : int
        prime order of G1, G2 and GT
    g1, g2 :
        generators of the source groups
    gt_generator :
        e(g1, g2), computed on first use
    """

    curve_id = None
    _curve = None
    fq_bytes = 0

    def __init__(self):
        self.p = self._curve.curve_order
        self.q = self._curve.field_modulus
        self.g1 = self._curve.G1
        self.g2 = self._curve.G2
        self._gt_generator = None

    def __repr__(self):
        return "<GroupParams %s>" % self.curve_id

    @property
    def gt_generator(self):
        if self._gt_generator is None:
            self._gt_generator = self.pair(self.g1, self.g2)
        return self._gt_generator

    # sizes of the canonical encodings
    @property
    def g1_bytes(self):
        return self.fq_bytes

    @property
    def g2_bytes(self):
        return 2 * self.fq_bytes

    @property
    def gt_bytes(self):
        return 12 * self.fq_bytes

    # -------------------------------------------------------------------------
    # group operations
    # -------------------------------------------------------------------------

    def pair(self, a, b):
        """e(a, b) for a in G1, b in G2"""
        return self._curve.pairing(b, a)

    def g1_mul(self, pt, k):
        return self._curve.multiply(pt, k % self.p)

    def g2_mul(self, pt, k):
        return self._curve.multiply(pt, k % self.p)

    def add(self, a, b):
        return self._curve.add(a, b)

    def gt_pow(self, x, k):
        return x ** (k % self.p)

    def eq(self, a, b):
        return self._curve.eq(a, b)

    def is_identity(self, pt):
        return self._curve.is_inf(pt)

    def in_subgroup(self, pt):
        return self._curve.is_inf(self._curve.multiply(pt, self.p))

    # -------------------------------------------------------------------------
    # encodings
    # -------------------------------------------------------------------------

    def encode_g1(self, pt):
        raise NotImplementedError("Implement in subclasses")

    def decode_g1(self, data):
        raise NotImplementedError("Implement in subclasses")

    def encode_g2(self, pt):
        raise NotImplementedError("Implement in subclasses")

    def decode_g2(self, data):
        raise NotImplementedError("Implement in subclasses")

    def encode_gt(self, x):
        return b''.join(
            (int(c) % self.q).to_bytes(self.fq_bytes, 'big') for c in x.coeffs
        )

    def decode_gt(self, data):
        """decode a target-group element, checking it has order dividing p"""
        data = bytes(data)
        if len(data) != self.gt_bytes:
            raise MalformedError("GT element must be %i bytes" % self.gt_bytes)
        n = self.fq_bytes
        coeffs = [int.from_bytes(data[i : i + n], 'big') for i in range(0, len(data), n)]
        if any(c >= self.q for c in coeffs):
            raise MalformedError("GT coefficient out of range")
        x = self._curve.FQ12(coeffs)
        if x ** self.p != self._curve.FQ12.one():
            raise MalformedError("GT element not in the order-p subgroup")
        return x

    def _check_g1(self, pt):
        if not self._curve.is_on_curve(pt, self._curve.b):
            raise MalformedError("G1 point not on curve")
        if not self.in_subgroup(pt):
            raise MalformedError("G1 point not in subgroup")
        return pt

    def _check_g2(self, pt):
        if not self._curve.is_on_curve(pt, self._curve.b2):
            raise MalformedError("G2 point not on curve")
        if not self.in_subgroup(pt):
            raise MalformedError("G2 point not in subgroup")
        return pt


class BLS12381Params(GroupParams):
    curve_id = 'bls12_381'
    _curve = _bls
    fq_bytes = 48

    def encode_g1(self, pt):
        return compress_G1(pt).to_bytes(48, 'big')

    def decode_g1(self, data):
        data = bytes(data)
        if len(data) != 48:
            raise MalformedError("G1 point must be 48 bytes")
        try:
            pt = decompress_G1(int.from_bytes(data, 'big'))
        except ValueError as e:
            raise MalformedError("bad G1 point: %s" % e)
        return self._check_g1(pt)

    def encode_g2(self, pt):
        z1, z2 = compress_G2(pt)
        return z1.to_bytes(48, 'big') + z2.to_bytes(48, 'big')

    def decode_g2(self, data):
        data = bytes(data)
        if len(data) != 96:
            raise MalformedError("G2 point must be 96 bytes")
        z = (int.from_bytes(data[:48], 'big'), int.from_bytes(data[48:], 'big'))
        try:
            pt = decompress_G2(z)
        except ValueError as e:
            raise MalformedError("bad G2 point: %s" % e)
        return self._check_g2(pt)


# flag bits in the first byte of a bn254 encoding; the field is 254 bits
_BN_INFINITY = 0x80
_BN_SIGN = 0x40
_BN_FLAGS = _BN_INFINITY | _BN_SIGN


class BN254Params(GroupParams):
    curve_id = 'bn254'
    _curve = _bn
    fq_bytes = 32

    def _half(self):
        return (self.q - 1) // 2

    def _fq2_sign(self, y):
        c0, c1 = (int(c) for c in y.coeffs)
        if c1:
            return c1 > self._half()
        return c0 > self._half()

    def _fq2_sqrt(self, a):
        """square root in Fq2 = Fq[i]/(i^2 + 1), q = 3 mod 4

        Returns None if `a` is not a square.
        """
        FQ2 = self._curve.FQ2
        q = self.q
        if a == FQ2.zero():
            return a
        a1 = a ** ((q - 3) // 4)
        alpha = a1 * a1 * a
        x0 = a1 * a
        if alpha == FQ2([q - 1, 0]):
            x = FQ2([0, 1]) * x0
        else:
            x = (FQ2.one() + alpha) ** ((q - 1) // 2) * x0
        if x * x != a:
            return None
        return x

    def encode_g1(self, pt):
        if self.is_identity(pt):
            return bytes([_BN_INFINITY]) + bytes(31)
        x, y = (int(c) for c in self._curve.normalize(pt))
        out = bytearray(x.to_bytes(32, 'big'))
        if y > self._half():
            out[0] |= _BN_SIGN
        return bytes(out)

    def decode_g1(self, data):
        data = bytes(data)
        if len(data) != 32:
            raise MalformedError("G1 point must be 32 bytes")
        flags = data[0] & _BN_FLAGS
        x = int.from_bytes(bytes([data[0] & ~_BN_FLAGS & 0xFF]) + data[1:], 'big')
        if flags & _BN_INFINITY:
            if flags != _BN_INFINITY or x:
                raise MalformedError("bad encoding of the G1 identity")
            return self._curve.Z1
        if x >= self.q:
            raise MalformedError("G1 x-coordinate out of range")
        rhs = (pow(x, 3, self.q) + int(self._curve.b)) % self.q
        y = pow(rhs, (self.q + 1) // 4, self.q)
        if y * y % self.q != rhs:
            raise MalformedError("G1 x-coordinate not on curve")
        if (y > self._half()) != bool(flags & _BN_SIGN):
            y = self.q - y
        FQ = self._curve.FQ
        return self._check_g1((FQ(x), FQ(y), FQ.one()))

    def encode_g2(self, pt):
        if self.is_identity(pt):
            return bytes([_BN_INFINITY]) + bytes(63)
        x, y = self._curve.normalize(pt)
        c0, c1 = (int(c) for c in x.coeffs)
        out = bytearray(c1.to_bytes(32, 'big') + c0.to_bytes(32, 'big'))
        if self._fq2_sign(y):
            out[0] |= _BN_SIGN
        return bytes(out)

    def decode_g2(self, data):
        data = bytes(data)
        if len(data) != 64:
            raise MalformedError("G2 point must be 64 bytes")
        flags = data[0] & _BN_FLAGS
        c1 = int.from_bytes(bytes([data[0] & ~_BN_FLAGS & 0xFF]) + data[1:32], 'big')
        c0 = int.from_bytes(data[32:], 'big')
        FQ2 = self._curve.FQ2
        if flags & _BN_INFINITY:
            if flags != _BN_INFINITY or c0 or c1:
                raise MalformedError("bad encoding of the G2 identity")
            return self._curve.Z2
        if c0 >= self.q or c1 >= self.q:
            raise MalformedError("G2 x-coordinate out of range")
        x = FQ2([c0, c1])
        y = self._fq2_sqrt(x * x * x + self._curve.b2)
        if y is None:
            raise MalformedError("G2 x-coordinate not on curve")
        if self._fq2_sign(y) != bool(flags & _BN_SIGN):
            y = -y
        return self._check_g2((x, y, FQ2.one()))


# -----------------------------------------------------------------------------
# native backend
# -----------------------------------------------------------------------------

HAVE_NATIVE = PairingGroup is not None

# type prefixes of charm's serialized elements
_CHARM_PREFIX = {G1: b'1', G2: b'2', GT: b'3'} if HAVE_NATIVE else {}


class PBCParams(GroupParams):
    """BN254 through charm's C bindings to PBC.

    This is PBC's own Barreto-Naehrig curve, not the alt_bn128 curve of
    ``bn254``, so the two are not interchangeable. Generators are hashed
    onto the curve from fixed strings. Points use PBC's compressed
    encoding; the sizes are read off the generators.

    Group operations in G1 and G2 are written multiplicatively by charm;
    this class keeps the additive interface.
    """

    curve_id = 'pbc_bn254'
    pbc_name = 'BN254'

    def __init__(self):
        if not HAVE_NATIVE:
            raise MalformedError(
                "curve %r needs the charm-crypto package" % self.curve_id
            )
        self._group = PairingGroup(self.pbc_name)
        self.p = int(self._group.order())
        self.g1 = self._group.hash(b'privdisc generator g1', G1)
        self.g2 = self._group.hash(b'privdisc generator g2', G2)
        self._gt_generator = None
        self._sizes = {
            G1: len(self._raw(self.g1)),
            G2: len(self._raw(self.g2)),
            GT: len(self._raw(self.gt_generator)),
        }

    @property
    def g1_bytes(self):
        return self._sizes[G1]

    @property
    def g2_bytes(self):
        return self._sizes[G2]

    @property
    def gt_bytes(self):
        return self._sizes[GT]

    def _zr(self, k):
        return self._group.init(ZR, k % self.p)

    def pair(self, a, b):
        return _charm_pair(a, b)

    def g1_mul(self, pt, k):
        return pt ** self._zr(k)

    def g2_mul(self, pt, k):
        return pt ** self._zr(k)

    def add(self, a, b):
        return a * b

    def gt_pow(self, x, k):
        return x ** self._zr(k)

    def eq(self, a, b):
        return a == b

    def is_identity(self, pt):
        # only the identity is idempotent
        return pt * pt == pt

    def in_subgroup(self, pt):
        return bool(self._group.ismember(pt))

    def _raw(self, element):
        return base64.b64decode(self._group.serialize(element).split(b':', 1)[1])

    def _load(self, kind, data):
        data = bytes(data)
        if len(data) != self._sizes[kind]:
            raise MalformedError("element must be %i bytes" % self._sizes[kind])
        blob = _CHARM_PREFIX[kind] + b':' + base64.b64encode(data)
        try:
            element = self._group.deserialize(blob)
        except Exception as e:
            # the bindings raise untyped errors for bad points
            raise MalformedError("bad group element: %s" % e)
        if not self.in_subgroup(element):
            raise MalformedError("group element not in the order-p subgroup")
        return element

    def encode_g1(self, pt):
        return self._raw(pt)

    def decode_g1(self, data):
        return self._load(G1, data)

    def encode_g2(self, pt):
        return self._raw(pt)

    def decode_g2(self, data):
        return self._load(G2, data)

    def encode_gt(self, x):
        return self._raw(x)

    def decode_gt(self, data):
        return self._load(GT, data)


CURVES = {
    BLS12381Params.curve_id: BLS12381Params,
    BN254Params.curve_id: BN254Params,
    PBCParams.curve_id: PBCParams,
}

# native pairings when charm is installed, py_ecc otherwise
DEFAULT_CURVE = PBCParams.curve_id if HAVE_NATIVE else BLS12381Params.curve_id


@lru_cache(maxsize=None)
def load_group(curve_id=DEFAULT_CURVE):
    """The (shared, immutable) GroupParams for a curve id."""
    try:
        cls = CURVES[curve_id]
    except KeyError:
        raise MalformedError(
            "unknown curve %r, expected one of %s" % (curve_id, sorted(CURVES))
        )
    return cls()
