"""test the 0-RTT replay cache"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
from concurrent.futures import ThreadPoolExecutor

import pytest

from privdisc.error import ReplayCacheFull
from privdisc.error import ReplayError
from privdisc.protocol.replay import ReplayCache

BID = b'b' * 16
OTHER = b'o' * 16


def test_add_and_check():
    cache = ReplayCache()
    cache.check(BID, b'sid-1')
    cache.add(BID, b'sid-1')
    assert cache.seen(BID, b'sid-1')
    assert not cache.seen(OTHER, b'sid-1')
    with pytest.raises(ReplayError):
        cache.check(BID, b'sid-1')
    with pytest.raises(ReplayError):
        cache.add(BID, b'sid-1')
    # same sid under another broadcast is a different session
    cache.add(OTHER, b'sid-1')
    assert len(cache) == 2


def test_capacity_fails_closed():
    cache = ReplayCache(capacity=2)
    cache.add(BID, b'1')
    cache.add(BID, b'2')
    with pytest.raises(ReplayCacheFull):
        cache.add(BID, b'3')
    # nothing was evicted
    assert cache.seen(BID, b'1') and cache.seen(BID, b'2')
    assert issubclass(ReplayCacheFull, ReplayError)
    cache.add(OTHER, b'3')


def test_forget():
    cache = ReplayCache()
    cache.add(BID, b'1')
    cache.forget(BID)
    assert not cache.seen(BID, b'1')
    assert len(cache) == 0
    cache.forget(b'never seen')


def test_concurrent_duplicates():
    """exactly one of many racing adds of the same sid wins"""
    cache = ReplayCache()

    def attempt(_):
        try:
            cache.add(BID, b'racing')
        except ReplayError:
            return False
        return True

    with ThreadPoolExecutor(8) as pool:
        results = list(pool.map(attempt, range(64)))
    assert results.count(True) == 1


def test_len_during_adds():
    cache = ReplayCache()

    def fill(i):
        cache.add(b'%016i' % (i % 50), b'sid-%i' % i)

    with ThreadPoolExecutor(4) as pool:
        added = pool.map(fill, range(2000))
        sizes = [len(cache) for _ in range(2000)]
        list(added)
    assert sizes == sorted(sizes)
    assert len(cache) == 2000
