"""Ready-made worlds and the contact-discovery demo."""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
from collections import namedtuple
from collections import OrderedDict

from privdisc.crypto.entropy import SeededEntropy
from privdisc.principals import new_root
from privdisc.principals import Principal
from privdisc.principals import SigningKeyPair
from privdisc.simnet.fabric import run_scenario
from privdisc.simnet.parties import AirDropReceiver
from privdisc.simnet.parties import AirDropSender
from privdisc.simnet.parties import Eavesdropper

World = namedtuple('World', ['idp', 'deployment', 'principals'])

AIRDROP_ROOT = 'idp.example'
AIRDROP_SENDER = 'idp.example/u/alice'
AIRDROP_RECEIVER = 'idp.example/u/bob'
AIRDROP_STRANGER = 'idp.example/u/mallory'
AIRDROP_FILE = b'IMG_0001.HEIC: 4 kB of holiday photo'


def build_world(seed, root, names, policies=None, group=None):
    """One identity provider and a principal per name, all from `seed`.

    Parameters
    ----------
    seed : str or int
    root : str
        single-component root name
    names : list of str
        names to enroll; each must extend `root`
    policies : dict, optional
        name -> policy for the principal holding it
    group : GroupParams, optional

    Returns
    -------
    World(idp, deployment, principals) with principals keyed by name
    """
    policies = policies or {}
    entropy = SeededEntropy(seed)
    idp = new_root(root, entropy.fork('root'), group)
    principals = OrderedDict()
    for name in names:
        keypair = SigningKeyPair.generate(entropy.fork('key/%s' % name))
        principal = Principal(keypair, policy=policies.get(name))
        idp.enroll(principal, name, entropy.fork('keyring/%s' % name))
        principals[name] = principal
    return World(idp, idp.deployment(), principals)


def airdrop_world(seed='airdrop'):
    return build_world(seed, AIRDROP_ROOT, [AIRDROP_SENDER, AIRDROP_RECEIVER, AIRDROP_STRANGER])


def airdrop_fix_scenario(sender_is_contact=True, script='run', seed='airdrop', world=None):
    """Contact discovery in which the receiver's identity stays private.

    The sender beacons a truncated hash of its name. A receiver that finds
    the name among its contacts announces itself, then runs a cacheable-mode
    handshake with its blessing prefix-encrypted to that contact's name;
    the sender sends the file under atk. Strangers get no answer at all.
    An eavesdropper endpoint counts occurrences of the receiver's blessing
    and public key in everything it saw (``hits.*`` outputs of ``eve``).

    Returns
    -------
    ScenarioReport with parties ``sender``, ``receiver`` and ``eve``
    """
    world = world or airdrop_world(seed)
    sender_name = AIRDROP_SENDER if sender_is_contact else AIRDROP_STRANGER
    receiver_principal = world.principals[AIRDROP_RECEIVER]
    sender = AirDropSender(
        'sender',
        principal=world.principals[sender_name],
        deployment=world.deployment,
        app_data=AIRDROP_FILE,
    )
    receiver = AirDropReceiver(
        'receiver',
        principal=receiver_principal,
        deployment=world.deployment,
        contacts=[AIRDROP_SENDER],
    )
    eve = Eavesdropper('eve')
    eve.watch('receiver-blessing', receiver_principal.blessing.encode())
    eve.watch('receiver-key', receiver_principal.public)
    return run_scenario(script, [sender, receiver, eve], seed=seed)
