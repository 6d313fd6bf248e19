"""Numeric policy: default tolerances and size caps.

Caps can be overridden per process through the ``SECRECY_FORGE_CAPS``
environment variable, a JSON object mapping cap names to integers, e.g.

    SECRECY_FORGE_CAPS='{"product_states": 16384}'
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace

from .errors import UsageError

# Probability arrays must sum to one within this tolerance.
VALIDATION_TOL = 1e-12

# Entries below this are treated as structural zeros when building
# support graphs and conditional slices.
SUPPORT_EPS = 1e-12

# Entropy-equality checks (block independence, unambiguity, ...).
ENTROPY_TOL = 1e-9

# Cross-measure chain checks on the semi-unambiguous class.
CHAIN_TOL = 2e-2

# Hermiticity / positivity slack accepted by state constructors.
STATE_TOL = 1e-10

ENV_CAPS = "SECRECY_FORGE_CAPS"


@dataclass(frozen=True)
class Caps:
    """Hard size limits for exact dense computations."""

    product_states: int = 4096   # joint alphabet size of an i.i.d. power
    rho_dim: int = 256           # total dimension of a density matrix
    branch_terms: int = 1_000_000  # summands in a protocol simulation


def load_caps(env: dict[str, str] | None = None) -> Caps:
    """Read caps, applying any SECRECY_FORGE_CAPS overrides."""
    raw = (env if env is not None else os.environ).get(ENV_CAPS)
    caps = Caps()
    if not raw:
        return caps
    try:
        overrides = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{ENV_CAPS} is not valid JSON: {exc}") from exc
    if not isinstance(overrides, dict):
        raise UsageError(f"{ENV_CAPS} must be a JSON object")
    known = set(Caps.__dataclass_fields__)
    for name, value in overrides.items():
        if name not in known:
            raise UsageError(f"unknown cap {name!r} in {ENV_CAPS}")
        if not isinstance(value, int) or value <= 0:
            raise UsageError(f"cap {name!r} must be a positive integer")
        caps = replace(caps, **{name: value})
    return caps


def default_tolerances() -> dict[str, float]:
    """Tolerance names accepted by the CLI's --tol.<name> flags."""
    return {
        "validation": VALIDATION_TOL,
        "support": SUPPORT_EPS,
        "entropy": ENTROPY_TOL,
        "chain": CHAIN_TOL,
        "equality": 1e-9,
    }
