"""Replay protection for 0-RTT flights."""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
from threading import Lock

from traitlets import Integer
from traitlets.config.configurable import LoggingConfigurable

from privdisc.error import ReplayCacheFull
from privdisc.error import ReplayError
from privdisc.util import short_hex


class ReplayCache(LoggingConfigurable):
    """Session ids seen under each broadcast.

    Exact-set semantics. When a broadcast's set is full, new sessions are
    refused rather than evicting old entries.
    """

    capacity = Integer(
        2 ** 20,
        config=True,
        help="""Maximum number of session ids remembered per broadcast.

        Once reached, further sessions under that broadcast are refused
        until the broadcast is rotated.""",
    )

    def __init__(self, **kwargs):
        super(ReplayCache, self).__init__(**kwargs)
        self._seen = {}
        self._lock = Lock()

    def __len__(self):
        with self._lock:
            return sum(len(s) for s in self._seen.values())

    def seen(self, bid, sid):
        with self._lock:
            return sid in self._seen.get(bid, ())

    def check(self, bid, sid):
        """raise ReplayError if (bid, sid) was already accepted"""
        if self.seen(bid, sid):
            self.log.info("replay::rejected sid %s under bid %s", short_hex(sid), short_hex(bid))
            raise ReplayError("session id already used")

    def add(self, bid, sid):
        """Record (bid, sid); atomic with the duplicate check."""
        with self._lock:
            sids = self._seen.setdefault(bid, set())
            if sid in sids:
                self.log.info(
                    "replay::rejected sid %s under bid %s", short_hex(sid), short_hex(bid)
                )
                raise ReplayError("session id already used")
            if len(sids) >= self.capacity:
                self.log.warning(
                    "replay::cache full (%i) for bid %s", self.capacity, short_hex(bid)
                )
                raise ReplayCacheFull("replay cache full for broadcast")
            sids.add(sid)

    def forget(self, bid):
        """drop a rotated broadcast's set"""
        with self._lock:
            self._seen.pop(bid, None)
