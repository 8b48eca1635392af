import math

import numpy as np
import pytest

import orbitlab


def test_effective_dim():
    assert orbitlab.effective_dim([(3, 1)]) == (3, 2, 1)
    assert orbitlab.effective_dim([(1, 1)]) == (1, 0, 1)
    dim_v, k, K = orbitlab.effective_dim(orbitlab.cryoem_spec(2, 5))
    assert (dim_v, k, K) == (45, 13, 32)


def test_dihedral_decomposition():
    blocks = orbitlab.dihedral_decomposition(4)
    assert blocks == [(1, 1), (2, 1), (1, 1)]
    assert orbitlab.effective_dim(orbitlab.dihedral_decomposition(9))[2] == 5


def test_verdicts():
    v = orbitlab.verdict_cryoem(2, 5, 20, "gl")
    assert v["K"] == 32
    assert v["scope"] == "generic_point"
    assert v["closed_form"]

    v = orbitlab.verdict_phase_retrieval(16, 3, "o")
    assert v["scope"] == "all_points"

    v = orbitlab.verdict_rowsort(2, 3, 2)
    assert v["separating_all"]

    v = orbitlab.verdict_complex([(2, 1)], 0, "gl")
    assert v["K"] == 1


def test_power_spectrum_parseval():
    x = np.array([1.0, -0.5, 2.0, 0.25])
    p = orbitlab.power_spectrum(x)
    assert p.shape == (4,)
    assert math.isclose(p.sum(), 4 * float(x @ x), rel_tol=1e-10)


def test_rowsort():
    X = np.array([[3.0, 1.0, 2.0], [6.0, 5.0, 4.0]])
    Y = orbitlab.rowsort(X)
    assert np.array_equal(Y, np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]))


def test_gram_blocks():
    blocks = [(2, 1)]
    X = [np.array([[3.0], [4.0]])]
    g = orbitlab.gram_blocks(blocks, X)
    assert math.isclose(g[0][0, 0], 25.0)


def test_haar_orthogonal():
    Q = orbitlab.haar_orthogonal(4, seed=7)
    assert np.allclose(Q.T @ Q, np.eye(4), atol=1e-12)


def test_run_experiment_sharpness():
    report = orbitlab.run_experiment(
        {"schema": 1, "experiment": "sharpness", "case": "z4_grid", "trials": 25, "seed": 3}
    )
    assert report["aggregates"]["single_orbit"] == 25


def test_run_experiment_rejects_unknown_keys():
    with pytest.raises(RuntimeError):
        orbitlab.run_experiment(
            {"schema": 1, "experiment": "sharpness", "case": "z4_grid", "oops": True}
        )
