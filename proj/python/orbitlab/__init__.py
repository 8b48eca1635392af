"""orbitlab: recoverability bounds and orbit-recovery experiments."""

import json as _json

from ._core import (
    cryoem_spec,
    dihedral_decomposition,
    effective_dim,
    gram_blocks,
    haar_orthogonal,
    power_spectrum,
    rowsort,
    verdict_complex,
    verdict_cryoem,
    verdict_gram,
    verdict_phase_retrieval,
    verdict_real,
    verdict_rowsort,
)
from ._core import run_experiment as _run_experiment_json

__all__ = [
    "cryoem_spec",
    "dihedral_decomposition",
    "effective_dim",
    "gram_blocks",
    "haar_orthogonal",
    "power_spectrum",
    "rowsort",
    "run_experiment",
    "verdict_complex",
    "verdict_cryoem",
    "verdict_gram",
    "verdict_phase_retrieval",
    "verdict_real",
    "verdict_rowsort",
]


def run_experiment(config, jobs=1):
    """Run an experiment from a config dict and return the report as a dict."""
    return _json.loads(_run_experiment_json(_json.dumps(config), jobs))
