"""Test CLI application behavior"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
import os
import stat
import subprocess
import sys

import pytest

import privdisc
from privdisc.apps import bench
from privdisc.apps.privdiscapp import AdvertiseApp
from privdisc.apps.privdiscapp import atk_digest
from privdisc.apps.privdiscapp import KeygenApp
from privdisc.crypto.pairing import HAVE_NATIVE
from privdisc.crypto.pairing import load_group
from privdisc.error import EXIT_EXPIRED
from privdisc.error import EXIT_MALFORMED
from privdisc.error import EXIT_NOT_AUTHORIZED
from privdisc.protocol import discovery
from privdisc.serialize import wire

from .conftest import PHONE
from .conftest import ROOT
from .conftest import TV
from .conftest import TV_POLICY

BOB_NAME = 'dev.v.io/u/Bob/Laptop'

# -------------------------------------------------------------------------------
# Globals and Utilities
# -------------------------------------------------------------------------------


def privdisc_cmd(home, *args, expect=0):
    """run ``python -m privdisc`` against `home`; returns stdout text"""
    env = dict(os.environ, PRIVDISC_HOME=str(home))
    p = subprocess.run(
        [sys.executable, '-m', 'privdisc'] + list(args),
        env=env,
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
    )
    out = p.stdout.decode('utf8', 'replace')
    assert p.returncode == expect, p.stderr.decode('utf8', 'replace')
    return out


@pytest.fixture(scope='module')
def home(tmp_path_factory):
    """a key directory with an identity provider, a TV, a phone and Bob"""
    home = tmp_path_factory.mktemp('privdisc-home')
    privdisc_cmd(home, 'idp', 'init', '--root=%s' % ROOT)
    for label, name in [('tv', TV), ('phone', PHONE), ('bob', BOB_NAME)]:
        privdisc_cmd(home, 'keygen', '--label=%s' % label)
        privdisc_cmd(
            home, 'idp', 'issue', '--name=%s' % name, '--pubkey=%s' % (home / ('%s.pub' % label))
        )
    return home


@pytest.fixture(scope='module')
def bcast(home):
    path = home / 'tv.bcast'
    out = privdisc_cmd(
        home, 'advertise', '--principal=tv', '--policy=%s' % TV_POLICY, '--out=%s' % path
    )
    assert out.strip().endswith('PASS')
    return path


# -------------------------------------------------------------------------------
# Tests
# -------------------------------------------------------------------------------


def test_version():
    out = subprocess.check_output([sys.executable, '-m', 'privdisc', '--version'])
    assert out.decode('utf8').strip() == privdisc.__version__


def test_no_subcommand(tmp_path):
    out = privdisc_cmd(tmp_path, expect=1)
    assert 'No subcommand specified' in out


def test_key_directory(home):
    for name in ['mpk.pds', 'anchors.pds', 'idp-master.pds', 'tv.key', 'tv.blessing']:
        mode = os.stat(home / name).st_mode
        assert stat.S_IMODE(mode) == 0o600, name
    blessing = wire.decode((home / 'tv.blessing').read_bytes(), expect=wire.T_BLESSING)
    assert str(blessing.name) == TV


def test_idp_init_twice(home):
    privdisc_cmd(home, 'idp', 'init', '--root=%s' % ROOT, expect=1)


def test_advertise_counter(home, tmp_path):
    counters = []
    for name in ['first.bcast', 'second.bcast']:
        path = tmp_path / name
        privdisc_cmd(
            home, 'advertise', '--principal=tv', '--policy=%s' % TV_POLICY, '--out=%s' % path
        )
        broadcast = wire.decode(path.read_bytes(), expect=wire.T_BROADCAST)
        counters.append(discovery.bid_counter(broadcast.bid))
    assert counters[1] == counters[0] + 1
    assert int((home / 'tv.counter').read_text()) == counters[1]
    assert stat.S_IMODE(os.stat(home / 'tv.counter').st_mode) == 0o600


def test_discover(home, bcast):
    out = privdisc_cmd(home, 'discover', '--principal=phone', '--in=%s' % bcast)
    assert out.strip() == TV


def test_discover_not_authorized(home, bcast):
    out = privdisc_cmd(home, 'discover', '--principal=bob', '--in=%s' % bcast, expect=3)
    assert out.strip() == 'not authorized'
    assert EXIT_NOT_AUTHORIZED == 3


def test_discover_expired(home, bcast):
    privdisc_cmd(
        home,
        'discover',
        '--principal=phone',
        '--in=%s' % bcast,
        '--now=2100-01-01T00:00:00Z',
        expect=EXIT_EXPIRED,
    )


def test_discover_malformed(home, tmp_path):
    junk = tmp_path / 'junk.bcast'
    junk.write_bytes(b'PDS1\x09not a broadcast')
    privdisc_cmd(home, 'discover', '--principal=phone', '--in=%s' % junk, expect=EXIT_MALFORMED)


def test_connect(home, tmp_path):
    early = tmp_path / 'early.txt'
    early.write_bytes(b'turn on')
    out = privdisc_cmd(
        home,
        'connect',
        '--server=tv',
        '--client=phone',
        '--policy=%s' % TV_POLICY,
        '--early-data=%s' % early,
        '--reply=ok',
    )
    lines = out.strip().splitlines()
    assert lines[:4] == ['server %s' % TV, 'client %s' % PHONE, 'early data 7 bytes', 'reply ok']
    assert lines[-1] == 'atk match yes'


def test_connect_outsider(home):
    out = privdisc_cmd(
        home, 'connect', '--server=tv', '--client=bob', '--policy=%s' % TV_POLICY, expect=3
    )
    assert 'not authorized' in out


# in-process


def test_keygen(tmp_path, capsys):
    app = KeygenApp(home=str(tmp_path), label='lamp')
    app.start()
    out = capsys.readouterr().out
    assert out.strip() == str(tmp_path / 'lamp.pub')
    pub = wire.decode((tmp_path / 'lamp.pub').read_bytes(), expect=wire.T_PUBLIC_KEY)
    key = wire.decode((tmp_path / 'lamp.key').read_bytes(), expect=wire.T_SIGNING_KEY)
    assert pub.key == key.public
    # refuses to overwrite without --force
    with pytest.raises(SystemExit) as exc:
        KeygenApp(home=str(tmp_path), label='lamp').start()
    assert exc.value.code == 1
    KeygenApp(home=str(tmp_path), label='lamp', force=True).start()
    assert (tmp_path / 'lamp.key').read_bytes() != b''


def test_advertise_needs_policy(tmp_path):
    with pytest.raises(SystemExit) as exc:
        AdvertiseApp(home=str(tmp_path)).start()
    assert exc.value.code == 1


def test_atk_digest():
    assert len(atk_digest(bytes(32))) == 16
    assert atk_digest(bytes(32)) != atk_digest(b'\x01' * 32)


# -------------------------------------------------------------------------------
# bench
# -------------------------------------------------------------------------------


def test_tsv():
    rows = [('SIGMA-I', 1.5), ('Private Mutual Auth', 6.0), ('Slowdown', 4.0)]
    text = bench.format_tsv(rows)
    assert text.splitlines()[0] == 'operation\tmedian\tunit'
    assert text.splitlines()[-1] == 'Slowdown\t4.000\tx'
    assert bench.parse_tsv(text) == dict(rows)
    with pytest.raises(ValueError):
        bench.parse_tsv('Pairing\t1.0\tms\n')


def test_bench_ibe():
    rows = bench.bench_ibe(load_group('bn254'), iterations=1)
    assert [name for name, _ in rows] == list(bench.IBE_ROWS)
    assert all(value > 0 for _, value in rows)


@pytest.mark.slow
def test_bench_handshake(world, tv, phone):
    rows = dict(bench.bench_handshake(phone, tv, world.deployment, iterations=3))
    assert list(rows) == list(bench.HANDSHAKE_ROWS)
    assert rows['Slowdown'] > 1


@pytest.mark.slow
@pytest.mark.skipif(not HAVE_NATIVE, reason="pure-Python pairings are far outside the band")
def test_handshake_slowdown_band(world, tv, phone):
    assert world.deployment.curve == 'pbc_bn254'
    rows = dict(bench.bench_handshake(phone, tv, world.deployment, iterations=20))
    assert 1.0 < rows['Slowdown'] < 12.0
