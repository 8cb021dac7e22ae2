"""test the small helpers in privdisc.util"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
import logging
import os
import stat

import pytest
from traitlets.config.configurable import LoggingConfigurable

from privdisc import util


def test_parse_date():
    assert util.parse_date('1700000000') == 1700000000
    assert util.parse_date(1700000000) == 1700000000
    assert util.parse_date('2023-11-14T22:13:20Z') == 1700000000
    assert util.parse_date('2023-11-14T23:13:20+01:00') == 1700000000


def test_format_unix():
    assert util.format_unix(1700000000) == '2023-11-14T22:13:20+00:00'
    assert util.parse_date(util.format_unix(1234567890)) == 1234567890


def test_short_hex():
    assert util.short_hex(b'\x01\x02') == '0102'
    assert util.short_hex(bytes(range(16))) == '0001020304050607..'
    assert util.short_hex(bytes(range(16)), 2) == '0001..'


def test_ct_equal():
    assert util.ct_equal(b'abc', bytearray(b'abc'))
    assert not util.ct_equal(b'abc', b'abd')
    assert not util.ct_equal(b'abc', b'ab')


def test_write_private_file(tmp_path):
    path = str(tmp_path / 'secret.key')
    util.write_private_file(path, b'one')
    assert util.read_file(path) == b'one'
    assert stat.S_IMODE(os.stat(path).st_mode) == 0o600
    with pytest.raises(FileExistsError):
        util.write_private_file(path, b'two')
    util.write_private_file(path, b'two', overwrite=True)
    assert util.read_file(path) == b'two'


def test_ensure_private_dir(tmp_path):
    path = str(tmp_path / 'a' / 'b')
    assert util.ensure_private_dir(path) == path
    assert stat.S_IMODE(os.stat(path).st_mode) == 0o700
    util.ensure_private_dir(path)


class Flaky(LoggingConfigurable):
    @util.log_errors
    def explode(self):
        raise RuntimeError("boom")

    @util.log_errors
    def fine(self, x):
        return x * 2


def test_log_errors(caplog):
    flaky = Flaky()
    flaky.log.propagate = True
    with caplog.at_level(logging.ERROR):
        assert flaky.explode() is None
    assert 'Uncaught exception' in caplog.text
    assert flaky.fine(2) == 4
