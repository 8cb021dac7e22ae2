"""Micro-benchmarks for the IBE primitives and the handshakes.

Results are medians in milliseconds, emitted as TSV with a header row.
"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
import statistics
import time

from traitlets.log import get_logger

from privdisc.crypto.entropy import SeededEntropy
from privdisc.crypto.ibe import ibe_decrypt
from privdisc.crypto.ibe import ibe_encrypt
from privdisc.crypto.ibe import ibe_extract
from privdisc.crypto.ibe import ibe_setup
from privdisc.protocol import mutual_auth

IBE_ROWS = ('Pairing', 'Encrypt', 'Decrypt', 'Extract')
HANDSHAKE_ROWS = ('SIGMA-I', 'Private Mutual Auth', 'Slowdown')
HEADER = ('operation', 'median', 'unit')

BENCH_IDENTITY = 'dev.v.io/u/Alice/Devices/TV'


def median_ms(fn, iterations):
    """median wall time of `fn()` over `iterations` calls, in ms"""
    samples = []
    for _ in range(iterations):
        tic = time.perf_counter()
        fn()
        samples.append((time.perf_counter() - tic) * 1e3)
    return statistics.median(samples)


def bench_ibe(group, iterations=50, entropy=None):
    """[(row, median ms)] for Pairing, Encrypt, Decrypt, Extract"""
    entropy = entropy or SeededEntropy('bench-ibe')
    master = ibe_setup(group, entropy)
    key = ibe_extract(master, BENCH_IDENTITY, entropy)
    message = entropy.bytes(32)
    mpk = master.mpk
    ct = ibe_encrypt(mpk, BENCH_IDENTITY, message, entropy)
    a = group.g1_mul(group.g1, entropy.scalar(group.p))
    b = group.g2_mul(group.g2, entropy.scalar(group.p))

    def encrypt():
        return ibe_encrypt(mpk, BENCH_IDENTITY, message, entropy)

    log = get_logger()
    log.info("bench::ibe on %s, %i iterations", group.curve_id, iterations)
    return [
        ('Pairing', median_ms(lambda: group.pair(a, b), iterations)),
        ('Encrypt', median_ms(encrypt, iterations)),
        ('Decrypt', median_ms(lambda: ibe_decrypt(key, ct), iterations)),
        ('Extract', median_ms(lambda: ibe_extract(master, BENCH_IDENTITY, entropy), iterations)),
    ]


def run_handshake(client, server, deployment, mode, cached=None, entropy=None):
    """One complete in-memory handshake; returns (client session, server session)."""
    c = mutual_auth.ClientSession(client, deployment, mode, entropy)
    s = mutual_auth.ServerSession(server, deployment, mode, entropy, cached=cached)
    m1 = mutual_auth.client_init(c)
    m2 = mutual_auth.server_respond(s, m1)
    m3 = mutual_auth.client_process_response(c, m2)
    mutual_auth.server_process_finish(s, m3)
    return c, s


def bench_handshake(client, server, deployment, iterations=20, entropy=None):
    """SIGMA-I against the cacheable private handshake, ct_S precomputed.

    Returns [(row, value)]; the Slowdown row is a ratio, not milliseconds.
    """
    entropy = entropy or SeededEntropy('bench-handshake')
    cached = mutual_auth.CachedServerIdentity.create(server, deployment, entropy)
    sigma = median_ms(
        lambda: run_handshake(client, server, deployment, 'sigma', entropy=entropy), iterations
    )
    private = median_ms(
        lambda: run_handshake(client, server, deployment, 'cacheable', cached, entropy),
        iterations,
    )
    return [('SIGMA-I', sigma), ('Private Mutual Auth', private), ('Slowdown', private / sigma)]


def format_tsv(rows):
    lines = ['\t'.join(HEADER)]
    for name, value in rows:
        unit = 'x' if name == 'Slowdown' else 'ms'
        lines.append('%s\t%.3f\t%s' % (name, value, unit))
    return '\n'.join(lines) + '\n'


def parse_tsv(text):
    """{row: value} from format_tsv output"""
    lines = text.strip().splitlines()
    if not lines or tuple(lines[0].split('\t')) != HEADER:
        raise ValueError("missing bench header")
    return {name: float(value) for name, value, _ in (line.split('\t') for line in lines[1:])}
