"""Single-device Bell-state certification.

A classical verifier, simulated quantum provers over trapdoor claw-free
function pairs, and a white-box analyzer that turns finite-dimensional
device models into soundness diagnostics.
"""
from .entcf import EntcfParams
from .harness import RunConfig, run_sessions, estimate_gammas, sweep
from .device import Device, from_honest, load_device, save_device
from .analysis import analyze

__all__ = ["EntcfParams", "RunConfig", "run_sessions", "estimate_gammas",
           "sweep", "Device", "from_honest", "load_device", "save_device",
           "analyze"]
__version__ = "0.1.0"
