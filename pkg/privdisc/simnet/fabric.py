"""An in-process adversarial network.

Parties hand frames to a :class:`Fabric`, which queues them. Nothing is
delivered unless the script says so, so the script plays the network
adversary. One action per line, ``#`` starts a comment::

    deliver [N]             deliver the next N pending frames (default 1)
    run                     deliver until nothing is pending
    drop [N]                discard the next N pending frames
    replay SEQ [DST]        re-send transcript frame SEQ, optionally elsewhere
    mutate OFFSET XOR       xor one byte of the next pending frame
    inject DST HEX [SRC]    send arbitrary bytes, spoofing SRC
    delay SECONDS           advance the virtual clock
    reveal-state PARTY [SESSION]
    reveal-broadcast PARTY
    reveal-key PARTY [SESSION]
    corrupt PARTY

The hook actions only read party state; their results go to the report,
never to the transcript. After the last action the clock advances by one
timeout, so whatever is still waiting aborts.

Every transmission, honest or adversarial, is one transcript entry. A frame
sent to ``*`` reaches every endpoint but its sender and the taps.
"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
from collections import deque
from collections import namedtuple
from collections import OrderedDict

from traitlets import default
from traitlets import Float
from traitlets import Instance
from traitlets import Integer
from traitlets import Unicode
from traitlets.config.configurable import LoggingConfigurable

from privdisc.crypto.entropy import SeededEntropy
from privdisc.error import ScenarioError
from privdisc.simnet.hooks import CompromiseHooks
from privdisc.util import log_errors

BROADCAST = '*'
ADVERSARY = 'adversary'

TranscriptEntry = namedtuple('TranscriptEntry', ['seq', 't', 'src', 'dst', 'origin', 'data'])
Pending = namedtuple('Pending', ['seq', 'src', 'dst', 'data'])
Action = namedtuple('Action', ['verb', 'args'])
HookResult = namedtuple('HookResult', ['action', 'party', 'key', 'value'])


# -----------------------------------------------------------------------------
# scripts
# -----------------------------------------------------------------------------


def _int(s):
    return int(s, 0)


def _hex(s):
    try:
        return bytes.fromhex(s)
    except ValueError:
        raise ScenarioError("bad hex %r" % s)


# verb: (required argument converters, optional argument converters)
_GRAMMAR = {
    'deliver': ((), (_int,)),
    'run': ((), ()),
    'drop': ((), (_int,)),
    'replay': ((_int,), (str,)),
    'mutate': ((_int, _int), ()),
    'inject': ((str, _hex), (str,)),
    'delay': ((float,), ()),
    'reveal-state': ((str,), (str,)),
    'reveal-broadcast': ((str,), ()),
    'reveal-key': ((str,), (str,)),
    'corrupt': ((str,), ()),
}

HOOK_VERBS = ('reveal-state', 'reveal-broadcast', 'reveal-key', 'corrupt')


def _format_arg(arg):
    if isinstance(arg, bytes):
        return arg.hex()
    return str(arg)


class Script(object):
    """An ordered list of adversary actions."""

    def __init__(self, actions=()):
        self.actions = [a if isinstance(a, Action) else Action(a[0], tuple(a[1:])) for a in actions]
        for action in self.actions:
            self._check(action)

    @staticmethod
    def _check(action):
        if action.verb not in _GRAMMAR:
            raise ScenarioError("unknown action %r" % action.verb)
        required, optional = _GRAMMAR[action.verb]
        if not len(required) <= len(action.args) <= len(required) + len(optional):
            raise ScenarioError("wrong number of arguments to %s" % action.verb)
        if action.verb == 'mutate' and not 0 < action.args[1] <= 0xFF:
            raise ScenarioError("mutate xor must be in 1..255")
        if action.verb == 'mutate' and action.args[0] < 0:
            raise ScenarioError("mutate offset must not be negative")
        if action.verb == 'delay' and action.args[0] < 0:
            raise ScenarioError("the clock only moves forward")
        if action.verb in ('deliver', 'drop') and action.args and action.args[0] < 1:
            raise ScenarioError("%s count must be positive" % action.verb)

    @classmethod
    def parse(cls, text):
        actions = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            verb, *words = line.split()
            if verb not in _GRAMMAR:
                raise ScenarioError("line %i: unknown action %r" % (lineno, verb))
            converters = _GRAMMAR[verb][0] + _GRAMMAR[verb][1]
            if len(words) > len(converters):
                raise ScenarioError("line %i: too many arguments to %s" % (lineno, verb))
            try:
                args = tuple(conv(w) for conv, w in zip(converters, words))
            except ValueError as e:
                raise ScenarioError("line %i: %s" % (lineno, e))
            actions.append(Action(verb, args))
        return cls(actions)

    def to_text(self):
        lines = []
        for action in self.actions:
            lines.append(' '.join([action.verb] + [_format_arg(a) for a in action.args]))
        return '\n'.join(lines) + '\n' if lines else ''

    __str__ = to_text

    def __iter__(self):
        return iter(self.actions)

    def __len__(self):
        return len(self.actions)

    def __add__(self, other):
        return Script(self.actions + list(other))

    def parties(self):
        """party names the script addresses (spoofed sources excluded)"""
        names = set()
        for action in self.actions:
            if action.verb == 'replay' and len(action.args) > 1:
                names.add(action.args[1])
            elif action.verb == 'inject':
                names.add(action.args[0])
            elif action.verb in HOOK_VERBS:
                names.add(action.args[0])
        names.discard(BROADCAST)
        return names


# -----------------------------------------------------------------------------
# reports
# -----------------------------------------------------------------------------


def transcript_scan(transcript, needle):
    """Count (overlapping) occurrences of `needle` across all frame bytes.

    `transcript` may be a ScenarioReport, a list of TranscriptEntry or a
    list of bytes.
    """
    if isinstance(transcript, ScenarioReport):
        transcript = transcript.transcript
    needle = bytes(needle)
    if not needle:
        return 0
    count = 0
    for entry in transcript:
        data = entry.data if isinstance(entry, TranscriptEntry) else bytes(entry)
        i = data.find(needle)
        while i >= 0:
            count += 1
            i = data.find(needle, i + 1)
    return count


class ScenarioReport(object):
    """What happened in one run: the transcript, what each party ended up
    with, why sessions aborted, and what the hooks revealed."""

    def __init__(self, seed='', transcript=(), outputs=None, aborts=(), hooks=()):
        self.seed = seed
        self.transcript = list(transcript)
        self.outputs = OrderedDict(outputs or ())
        self.aborts = list(aborts)
        self.hooks = list(hooks)

    def output(self, party, key, default=None):
        return self.outputs.get(party, {}).get(key, default)

    def aborts_for(self, party):
        return [reason for name, reason in self.aborts if name == party]

    def frames_from(self, party):
        return [e for e in self.transcript if e.src == party]

    def to_text(self):
        lines = ['# privdisc scenario report', 'seed %s' % self.seed]
        for e in self.transcript:
            lines.append(
                'frame %i %.3f %s %s %s %s' % (e.seq, e.t, e.src, e.dst, e.origin, e.data.hex())
            )
        for party, values in self.outputs.items():
            for key, value in values.items():
                lines.append('output %s %s %s' % (party, key, value))
        for party, reason in self.aborts:
            lines.append('abort %s %s' % (party, reason))
        for h in self.hooks:
            lines.append('hook %s %s %s %s' % h)
        return '\n'.join(lines) + '\n'

    __str__ = to_text

    @classmethod
    def from_text(cls, text):
        report = cls()
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip() or line.startswith('#'):
                continue
            kind, _, rest = line.partition(' ')
            try:
                if kind == 'seed':
                    report.seed = rest
                elif kind == 'frame':
                    seq, t, src, dst, origin, data = rest.split(' ')
                    report.transcript.append(
                        TranscriptEntry(int(seq), float(t), src, dst, origin, bytes.fromhex(data))
                    )
                elif kind == 'output':
                    party, key, value = rest.split(' ', 2)
                    report.outputs.setdefault(party, OrderedDict())[key] = value
                elif kind == 'abort':
                    party, reason = rest.split(' ', 1)
                    report.aborts.append((party, reason))
                elif kind == 'hook':
                    report.hooks.append(HookResult(*rest.split(' ', 3)))
                else:
                    raise ValueError("unknown record %r" % kind)
            except ValueError as e:
                raise ScenarioError("report line %i: %s" % (lineno, e))
        return report

    def __eq__(self, other):
        return isinstance(other, ScenarioReport) and self.to_text() == other.to_text()

    def __repr__(self):
        return "<ScenarioReport %i frames, %i aborts>" % (len(self.transcript), len(self.aborts))


# -----------------------------------------------------------------------------
# the fabric
# -----------------------------------------------------------------------------


class Fabric(LoggingConfigurable):
    """Single-threaded message fabric with a virtual clock."""

    timeout = Float(
        30.0,
        config=True,
        help="Virtual seconds without an inbound frame before a waiting session aborts.",
    )
    seed = Unicode(
        'privdisc-simnet',
        config=True,
        help="Seed for every party's entropy stream. Equal seeds, equal transcripts.",
    )
    epoch = Integer(
        1700000000,
        config=True,
        help="Unix time at virtual time zero.",
    )
    max_deliveries = Integer(
        10000,
        config=True,
        help="Upper bound on deliveries per scenario, to catch livelocks.",
    )

    hooks = Instance(CompromiseHooks)

    @default('hooks')
    def _hooks_default(self):
        return CompromiseHooks(self)

    def __init__(self, **kwargs):
        super(Fabric, self).__init__(**kwargs)
        self.now = 0.0
        self.parties = OrderedDict()
        self.queue = deque()
        self.transcript = []
        self.hook_results = []
        self.deliveries = 0
        self.entropy = SeededEntropy(self.seed)

    # endpoints

    def register(self, party):
        if party.name in self.parties or party.name in (BROADCAST, ADVERSARY):
            raise ScenarioError("endpoint name %r already taken" % party.name)
        self.parties[party.name] = party
        party.attach(self, self.entropy.fork(party.name))
        self.log.debug("fabric::registered %s", party.name)
        return party

    def party(self, name):
        try:
            return self.parties[name]
        except KeyError:
            raise ScenarioError("unknown party %r" % name)

    @property
    def taps(self):
        return [p for p in self.parties.values() if p.tap]

    def unix_now(self):
        return self.epoch + int(self.now)

    # transmission

    def _transmit(self, src, dst, data, origin):
        entry = TranscriptEntry(len(self.transcript), self.now, src, dst, origin, bytes(data))
        self.transcript.append(entry)
        for tap in self.taps:
            self._dispatch(tap.observe_entry, entry)
        return entry

    def send(self, src, dst, data):
        """a party's transmission; queued until the script delivers it"""
        entry = self._transmit(src, dst, data, 'party')
        self.queue.append(Pending(entry.seq, src, dst, entry.data))
        return entry.seq

    def _adversary_send(self, src, dst, data, front=False):
        entry = self._transmit(src, dst, data, 'adversary')
        pending = Pending(entry.seq, src, dst, entry.data)
        if front:
            self.queue.appendleft(pending)
        else:
            self.queue.append(pending)
        return entry.seq

    @log_errors
    def _dispatch(self, callback, *args):
        return callback(*args)

    def _recipients(self, msg):
        if msg.dst == BROADCAST:
            return [p for p in self.parties.values() if not p.tap and p.name != msg.src]
        party = self.parties.get(msg.dst)
        return [party] if party is not None and not party.tap else []

    def deliver(self, n=1):
        for _ in range(n):
            if not self.queue:
                self.log.debug("fabric::nothing to deliver")
                return
            self.deliveries += 1
            if self.deliveries > self.max_deliveries:
                raise ScenarioError("more than %i deliveries" % self.max_deliveries)
            msg = self.queue.popleft()
            for party in self._recipients(msg):
                self._dispatch(party.receive, msg.src, msg.data)

    def run_queue(self):
        while self.queue:
            self.deliver()

    def drop(self, n=1):
        for _ in range(min(n, len(self.queue))):
            msg = self.queue.popleft()
            self.log.debug("fabric::dropped frame %i %s -> %s", msg.seq, msg.src, msg.dst)

    def replay(self, seq, dst=None):
        if not 0 <= seq < len(self.transcript):
            self.log.debug("fabric::no frame %i to replay", seq)
            return None
        entry = self.transcript[seq]
        return self._adversary_send(entry.src, dst or entry.dst, entry.data)

    def mutate(self, offset, xor):
        """Rewrite the next pending frame; offsets past the end wrap around."""
        if not self.queue:
            self.log.debug("fabric::nothing to mutate")
            return None
        msg = self.queue.popleft()
        data = bytearray(msg.data)
        data[offset % len(data)] ^= xor
        return self._adversary_send(msg.src, msg.dst, bytes(data), front=True)

    def inject(self, dst, data, src=ADVERSARY):
        return self._adversary_send(src, dst, data)

    def advance(self, seconds):
        if seconds < 0:
            raise ScenarioError("the virtual clock is monotone")
        self.now += seconds
        for party in self.parties.values():
            self._dispatch(party.tick, self.now)

    # scripts

    def _hook(self, action):
        name = action.args[0]
        extra = action.args[1] if len(action.args) > 1 else None
        if action.verb == 'reveal-state':
            revealed = self.hooks.reveal_session_state(name, extra)
            items = [(k, '-' if v is None else '%x' % v) for k, v in revealed.items()]
        elif action.verb == 'reveal-broadcast':
            s = self.hooks.reveal_broadcast(name)
            items = [('s', '-' if s is None else '%x' % s)]
        elif action.verb == 'reveal-key':
            atk = self.hooks.reveal_key(name, extra)
            items = [('atk', '-' if atk is None else atk.hex())]
        else:
            secret, keyrings = self.hooks.corrupt(name)
            items = [('signing-key', secret.hex())]
            items.extend(('keyring', str(ring.name)) for ring in keyrings)
        for key, value in items:
            self.hook_results.append(HookResult(action.verb, name, key, value))

    def execute(self, action):
        verb, args = action
        if verb == 'deliver':
            self.deliver(*args)
        elif verb == 'run':
            self.run_queue()
        elif verb == 'drop':
            self.drop(*args)
        elif verb == 'replay':
            self.replay(*args)
        elif verb == 'mutate':
            self.mutate(*args)
        elif verb == 'inject':
            self.inject(*args)
        elif verb == 'delay':
            self.advance(args[0])
        else:
            self._hook(action)

    def run(self, script):
        """Start every party, play `script`, let stragglers time out.

        Returns a ScenarioReport.
        """
        if isinstance(script, str):
            script = Script.parse(script)
        unknown = sorted(script.parties() - set(self.parties))
        if unknown:
            raise ScenarioError("script references unknown parties: %s" % ', '.join(unknown))
        for party in self.parties.values():
            self._dispatch(party.start)
        for action in script:
            self.execute(action)
        self.advance(self.timeout)
        for party in self.parties.values():
            self._dispatch(party.finish)
        self.log.info(
            "fabric::scenario done: %i frames, %i deliveries", len(self.transcript), self.deliveries
        )
        return self.report()

    def report(self):
        outputs = OrderedDict((name, OrderedDict(p.outputs)) for name, p in self.parties.items())
        aborts = [(name, reason) for name, p in self.parties.items() for reason in p.aborts]
        return ScenarioReport(self.seed, self.transcript, outputs, aborts, self.hook_results)

    def __repr__(self):
        return "<Fabric t=%.3f, %i pending>" % (self.now, len(self.queue))


def run_scenario(script, parties, seed=None, **kwargs):
    """Run `script` against `parties` on a fresh Fabric.

    Parameters
    ----------
    script : Script or str
    parties : list of Party
        registered in order; that order is also the start order
    seed : str, optional
        entropy seed for the parties (Fabric.seed otherwise)

    Returns
    -------
    ScenarioReport
    """
    if seed is not None:
        kwargs['seed'] = str(seed)
    fabric = Fabric(**kwargs)
    for party in parties:
        fabric.register(party)
    return fabric.run(script)
