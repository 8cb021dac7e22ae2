# coding: utf-8
"""Some generic utilities: logging decorators, timestamps, key files."""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
import hmac
import os
import stat
from datetime import datetime

from dateutil.parser import parse as dateutil_parse
from dateutil.tz import tzlocal
from dateutil.tz import tzutc
from decorator import decorator

utc = tzutc()


# -----------------------------------------------------------------------------
# Functions
# -----------------------------------------------------------------------------


@decorator
def log_errors(f, self, *args, **kwargs):
    """decorator to log unhandled exceptions raised in a method.

    For use wrapping fabric delivery callbacks, so that an exception
    in one party does not tear down the whole simulation.
    """
    try:
        return f(self, *args, **kwargs)
    except Exception:
        self.log.error("Uncaught exception in %r" % f, exc_info=True)


def ct_equal(a, b):
    """constant-time comparison of two byte strings"""
    return hmac.compare_digest(bytes(a), bytes(b))


def short_hex(data, n=8):
    """abbreviated hex for log messages"""
    data = bytes(data)
    if len(data) <= n:
        return data.hex()
    return data[:n].hex() + '..'


# -----------------------------------------------------------------------------
# Time
# -----------------------------------------------------------------------------


def ensure_timezone(dt):
    """Ensure a datetime object has a timezone

    If it doesn't have one, attach the local timezone.
    """
    if dt.tzinfo is None:
        return dt.replace(tzinfo=tzlocal())
    else:
        return dt


def utcnow():
    """Timezone-aware UTC timestamp"""
    return datetime.now(utc)


def unix_now():
    """Current time as integer unix seconds"""
    return int(utcnow().timestamp())


def parse_date(s):
    """parse an ISO8601 date string (or integer unix seconds) to unix seconds"""
    s = str(s).strip()
    if s.isdigit():
        return int(s)
    return int(ensure_timezone(dateutil_parse(s)).timestamp())


def format_unix(ts):
    """ISO8601 rendering of unix seconds, for humans"""
    return datetime.fromtimestamp(ts, utc).isoformat()


# -----------------------------------------------------------------------------
# Key files
# -----------------------------------------------------------------------------


def ensure_private_dir(path):
    """create a directory readable only by the owner"""
    if not os.path.isdir(path):
        os.makedirs(path)
    # this will have no effect on Windows
    os.chmod(path, stat.S_IRWXU)
    return path


def write_private_file(path, data, overwrite=False):
    """write key material with owner-only permissions

    Raises FileExistsError unless `overwrite` is set.
    """
    if os.path.exists(path) and not overwrite:
        raise FileExistsError(path)
    flags = os.O_WRONLY | os.O_CREAT | os.O_TRUNC
    fd = os.open(path, flags, stat.S_IRUSR | stat.S_IWUSR)
    with os.fdopen(fd, 'wb') as f:
        f.write(data)
    os.chmod(path, stat.S_IRUSR | stat.S_IWUSR)
    return path


def read_file(path):
    with open(path, 'rb') as f:
        return f.read()
