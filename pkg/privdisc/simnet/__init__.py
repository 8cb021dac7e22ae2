"""In-process adversarial network for exercising the protocols."""
from .fabric import Fabric
from .fabric import run_scenario
from .fabric import ScenarioReport
from .fabric import Script
from .fabric import transcript_scan
from .hooks import CompromiseHooks
from .scenarios import airdrop_fix_scenario
