"""Compromise hooks for the simulated network.

Each hook reads a secret out of a party the way a key-exchange adversary's
queries do: a session's ephemeral exponents, a broadcast's semi-static
exponent, a session key, or a party's long-term secrets. Hooks never write
to party or session state, so a run with hooks produces the same transcript
as one without.
"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
from privdisc.error import ScenarioError


class CompromiseHooks(object):
    def __init__(self, fabric):
        self.fabric = fabric

    def _party(self, party):
        if isinstance(party, str):
            try:
                return self.fabric.parties[party]
            except KeyError:
                raise ScenarioError("unknown party %r" % party)
        return party

    def reveal_session_state(self, party, session=None):
        """live ephemeral exponents, ``{'x': int}`` or ``{'y': int}``; None if erased"""
        return dict(self._party(party).session_state(session))

    def reveal_broadcast(self, party, bid=None):
        """the semi-static exponent s behind `bid` (default: current), None if erased"""
        return self._party(party).broadcast_secret(bid)

    def reveal_key(self, party, session=None):
        """a completed session's atk"""
        return self._party(party).session_key(session)

    def corrupt(self, party):
        """(signing secret bytes, list of PrefixKeyRing)"""
        principal = self._party(party).principal
        if principal is None:
            raise ScenarioError("%s holds no long-term secrets" % party)
        return principal.keypair.secret_bytes(), list(principal.keyrings.values())
