import numpy as np
import pytest

from mixed_platoon.composition import Topology
from mixed_platoon.models import LinearCoeffs
from mixed_platoon.statespace import build_platoon_model

C = LinearCoeffs(0.9425, 1.5, 0.9)


def test_mpf_m2_blocks():
    mdl = build_platoon_model(C, 2, Topology.MPF)
    expected = np.array(
        [
            [0, -1, 0, 0],
            [0.9425, -1.5, 0, 0],
            [0, 1, 0, -1],
            [0, 0, 0, 0],
        ]
    )
    np.testing.assert_array_equal(mdl.a_mat, expected)
    np.testing.assert_array_equal(mdl.b_vec.ravel(), [0, 0, 0, 1])
    np.testing.assert_array_equal(mdl.h_vec.ravel(), [1, 0.9, 0, 0])
    np.testing.assert_array_equal(mdl.c_vec.ravel(), [0, 0, 0, 1])


def test_msl_m2_blocks():
    mdl = build_platoon_model(C, 2, Topology.MSL)
    expected = np.array(
        [
            [0, -1, 0, 0],
            [0.9425, -1.5, 0, 0],
            [0, 1, 0, -1],
            [0, 0.9, 0.9425, -1.5],
        ]
    )
    np.testing.assert_array_equal(mdl.a_mat, expected)
    np.testing.assert_array_equal(mdl.b_vec.ravel(), [0, 1, 0, 0])
    np.testing.assert_array_equal(mdl.h_vec.ravel(), [1, 0.9, 0, 0])
    np.testing.assert_array_equal(mdl.c_vec.ravel(), [0, 0, 0, 1])


@pytest.mark.parametrize("m", [2, 3, 5, 8])
def test_mpf_open_loop_has_double_zero(m):
    eig = np.linalg.eigvals(build_platoon_model(C, m, Topology.MPF).a_mat)
    assert np.sum(np.abs(eig) < 1e-9) >= 2


@pytest.mark.parametrize("topology", [Topology.MPF, Topology.MSL])
@pytest.mark.parametrize("m", range(2, 9))
def test_shapes_and_sparsity(topology, m):
    mdl = build_platoon_model(C, m, topology)
    n = 2 * m
    assert mdl.a_mat.shape == (n, n)
    assert mdl.b_vec.shape == (n, 1) and mdl.h_vec.shape == (n, 1) and mdl.c_vec.shape == (1, n)
    rows, cols = np.nonzero(mdl.a_mat)
    assert np.all((cols // 2 == rows // 2) | (cols // 2 == rows // 2 - 1))
    nz = np.flatnonzero(mdl.b_vec)
    assert nz.size == 1 and mdl.b_vec[nz[0], 0] == 1.0
    assert nz[0] == 2 * mdl.cav_block + 1
    np.testing.assert_array_equal(mdl.h_vec[2:], 0.0)
    np.testing.assert_array_equal(mdl.h_vec[:2, 0], [1.0, C.a3])
    assert np.flatnonzero(mdl.c_vec).tolist() == [n - 1]


@pytest.mark.parametrize("m", [2, 4, 7])
def test_msl_cav_row_matches_hdv_row(m):
    mdl = build_platoon_model(C, m, Topology.MSL)
    # own spacing, own velocity, predecessor velocity (enters via H)
    assert (mdl.a_mat[1, 0], mdl.a_mat[1, 1], mdl.h_vec[1, 0]) == (C.a1, -C.a2, C.a3)


def test_size_one_rejected():
    with pytest.raises(ValueError):
        build_platoon_model(C, 1, Topology.MPF)
    with pytest.raises(ValueError):
        build_platoon_model(C, 3, Topology.CACC)
