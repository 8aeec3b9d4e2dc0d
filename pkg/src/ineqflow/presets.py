"""
Shipped experiment presets.

The two published examples only show their communication graphs as
pictures.  The presets substitute a schedule that alternates, for half a
period each, the unit-weight directed ring i -> i+1 and the ring i -> i+2
(indices mod n).  Each ring is balanced and their union is strongly
connected, so the limits guaranteed by the convergence results are
unchanged, but individual trajectories can differ from the published plots.
"""

import copy
import json
from importlib import resources

from .config import ExperimentConfig, parse_config
from .errors import UnknownPreset

NAMES = ("example1", "example2", "infeasible1d", "consensus-only")

EXAMPLE1_C = [
    [2, 3, 4],
    [2, -3, -4],
    [-2, 1, 0.5],
    [2, -1, 6],
    [1, 0, 2],
    [1, -2, 0.3],
    [0.5, 2, 1],
    [-1, -1, 0.5],
    [-2, 3, 3],
]
EXAMPLE1_D = [-0.1, -3, -1, 2, 1, -1, -2, 0.1, 1]
# consensus point reported for the published topology; comparison only
EXAMPLE1_REFERENCE = [0.13, -0.15, -0.57]

EXAMPLE2_OMEGA = [0.5, 0.3, 0.4, 0.6, 0.2]
EXAMPLE2_CONSTRAINTS = [(2, -8), (-1, 2), (1, -4.5), (3, -15), (-1, 1)]


def two_ring_segments(n, period):
    half = period / 2
    return [
        {"duration": half,
         "edges": [{"from": i + 1, "to": (i + off) % n + 1, "weight": 1.0} for i in range(n)]}
        for off in (1, 2)
    ]


def _example1():
    return {
        "name": "example1",
        "schedule": {"n": 9, "segments": two_ring_segments(9, 0.3)},
        "problem": {
            "mode": "feasibility",
            "m": 3,
            "constraints": [{"kind": "affine", "c": c, "d": d}
                            for c, d in zip(EXAMPLE1_C, EXAMPLE1_D)],
        },
        "gain": {"kind": "harmonic", "a0": 0.9, "b0": 5},
        "sim": {"h": 1e-3, "t_end": 300, "record_stride": None,
                "initial_states": [[1, -0.5, 1]] * 9, "initial_multipliers": None},
        "output": "example1.csv",
        "reference_point": EXAMPLE1_REFERENCE,
    }


def _example2():
    return {
        "name": "example2",
        "schedule": {"n": 5, "segments": two_ring_segments(5, 1.0)},
        "problem": {
            "mode": "optimization",
            "m": 1,
            "costs": [{"kind": "huber", "w": w, "r": 100} for w in EXAMPLE2_OMEGA],
            "constraints": [{"kind": "affine", "c": [c], "d": d} for c, d in EXAMPLE2_CONSTRAINTS],
            "multiplier_caps": [50] * 5,
        },
        "gain": {"kind": "generalized_harmonic", "a0": 2.6, "b0": 0.25, "scale": 2},
        "sim": {"h": 1e-3, "t_end": 300, "record_stride": None,
                "initial_states": [[3], [-2], [-1], [1], [3]], "initial_multipliers": None},
        "output": "example2.csv",
        "reference_point": [2.0],
    }


def _infeasible1d():
    # g1 = x + 1 and g2 = 1 - x have no common solution; the sum of the plus
    # functions is 2 everywhere on [-1, 1]
    return {
        "name": "infeasible1d",
        "schedule": {"n": 2, "segments": [{"duration": 1.0, "edges": [
            {"from": 1, "to": 2, "weight": 1.0}, {"from": 2, "to": 1, "weight": 1.0}]}]},
        "problem": {
            "mode": "feasibility",
            "m": 1,
            "constraints": [{"kind": "affine", "c": [1], "d": 1},
                            {"kind": "affine", "c": [-1], "d": 1}],
        },
        "gain": {"kind": "harmonic", "a0": 1.0, "b0": 1.0},
        "sim": {"h": 1e-3, "t_end": 300, "record_stride": None,
                "initial_states": [[-0.5], [0.8]], "initial_multipliers": None},
        "output": "infeasible1d.csv",
    }


def _consensus_only():
    doc = _example1()
    doc["name"] = "consensus-only"
    doc["problem"]["mode"] = "consensus-only"
    doc["gain"] = {"kind": "constant", "c": 0.0}
    doc["sim"]["t_end"] = 30
    doc["sim"]["initial_states"] = [
        [1, -0.5, 1], [-2, 0, 3], [0.5, 2, -1], [3, -3, 0], [-1, 1, 2],
        [2, 0.5, -2], [0, -2, 1.5], [-3, 1.5, -0.5], [1.5, -1, -3],
    ]
    doc["output"] = "consensus-only.csv"
    del doc["reference_point"]
    return doc


_BUILDERS = {
    "example1": _example1,
    "example2": _example2,
    "infeasible1d": _infeasible1d,
    "consensus-only": _consensus_only,
}


def preset_document(name) -> dict:
    if name not in _BUILDERS:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {', '.join(NAMES)}")
    return copy.deepcopy(_BUILDERS[name]())


def preset(name) -> ExperimentConfig:
    return parse_config(preset_document(name))


def shipped_file(name):
    """Path-like handle to the JSON copy of a preset shipped with the package."""
    if name not in _BUILDERS:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {', '.join(NAMES)}")
    return resources.files("ineqflow") / "presets" / f"{name}.json"


def write_shipped_files(directory):
    """Regenerate the shipped JSON files from the builders."""
    from pathlib import Path
    for name in NAMES:
        Path(directory, f"{name}.json").write_text(json.dumps(preset_document(name), indent=2) + "\n")
