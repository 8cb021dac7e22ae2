# encoding: utf-8
"""
The base Application class for privdisc apps
"""
# Copyright (c) privdisc Development Team.
# Distributed under the terms of the Modified BSD License.
import logging
import os
import sys

from traitlets import default
from traitlets import Dict
from traitlets import Unicode
from traitlets.config.application import Application
from traitlets.config.application import catch_config_error
from traitlets.config.application import default_aliases
from traitlets.config.application import default_flags
from traitlets.config.application import LevelFormatter

from privdisc._version import __version__
from privdisc.error import PrivDiscError
from privdisc.serialize import wire
from privdisc.util import ensure_private_dir
from privdisc.util import read_file
from privdisc.util import write_private_file

HOME_ENV = 'PRIVDISC_HOME'

# -----------------------------------------------------------------------------
# Main application
# -----------------------------------------------------------------------------
base_aliases = {}
base_aliases.update(default_aliases)
base_aliases.update({'home': 'BasePrivDiscApplication.home'})

base_flags = {
    'debug': (
        {'Application': {'log_level': logging.DEBUG}},
        "set log level to logging.DEBUG (maximize logging output)",
    ),
    'quiet': (
        {'Application': {'log_level': logging.WARNING}},
        "only log warnings and errors",
    ),
}
base_flags.update(default_flags)


class BasePrivDiscApplication(Application):
    """The base Application for privdisc commands

    Adds the key directory, timestamped logging, and the mapping from
    PrivDiscError to the process exit code.
    """

    version = __version__

    def _log_level_default(self):
        return logging.INFO

    def _log_format_default(self):
        """override default log format to include time"""
        return u"%(asctime)s.%(msecs).03d [%(name)s]%(highlevel)s %(message)s"

    home = Unicode(
        config=True,
        help="""Directory holding key material.

        Defaults to $PRIVDISC_HOME, or ~/.privdisc. Files in it are written
        unencrypted with owner-only permissions.""",
    )

    @default('home')
    def _home_default(self):
        return os.environ.get(HOME_ENV) or os.path.join(os.path.expanduser('~'), '.privdisc')

    aliases = Dict(base_aliases)
    flags = Dict(base_flags)

    @catch_config_error
    def initialize(self, argv=None):
        """initialize the app"""
        super(BasePrivDiscApplication, self).initialize(argv)
        self.reinit_logging()

    def reinit_logging(self):
        self._log_formatter = LevelFormatter(self.log_format, datefmt=self.log_datefmt)
        for handler in self.log.handlers:
            handler.setFormatter(self._log_formatter)
        # stdout may carry wire bytes; logs stay on stderr
        self.log.propagate = False

    # key directory

    def path(self, filename):
        return os.path.join(os.path.expanduser(self.home), filename)

    def save(self, filename, obj, overwrite=False):
        """write a wire object into the key directory"""
        ensure_private_dir(os.path.expanduser(self.home))
        path = self.path(filename)
        write_private_file(path, wire.encode(obj), overwrite=overwrite)
        self.log.info("Wrote %s", path)
        return path

    def load(self, filename, expect=None, mpk=None):
        return wire.decode(read_file(self.path(filename)), expect=expect, mpk=mpk)

    # stdin / stdout pipelines

    def read_input(self, path):
        if path in ('', '-'):
            return sys.stdin.buffer.read()
        with open(path, 'rb') as f:
            return f.read()

    def write_output(self, path, data):
        if path in ('', '-'):
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
            return
        with open(path, 'wb') as f:
            f.write(data)
        self.log.info("Wrote %s (%i bytes)", path, len(data))

    # exit codes

    def run(self):
        raise NotImplementedError("subcommands implement run()")

    def start(self):
        if self.subapp is not None:
            return self.subapp.start()
        try:
            self.run()
        except PrivDiscError as e:
            self.log.error("%s: %s", e.__class__.__name__, e)
            self.exit(e.exit_code)
        except (OSError, ValueError) as e:
            self.log.error("%s", e)
            self.exit(1)
