import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from readtask.errors import ParameterError
from readtask.learners import (
    apply_scaler,
    apply_sequence_scaler,
    fit_scaler,
    fit_sequence_scaler,
)


def test_min_max_map_to_endpoints():
    train = np.array([[0.0], [5.0], [10.0]])
    params = fit_scaler(train)
    np.testing.assert_allclose(
        apply_scaler(params, train)[:, 0], [-1.0, 0.0, 1.0])


def test_constant_column_maps_to_zero():
    train = np.array([[3.0], [3.0], [3.0]])
    params = fit_scaler(train)
    np.testing.assert_allclose(apply_scaler(params, train), 0.0)


def test_test_values_may_exceed_range():
    params = fit_scaler(np.array([[0.0], [10.0]]))
    out = apply_scaler(params, np.array([[12.0]]))
    assert out[0, 0] == pytest.approx(1.4)


def test_columns_scaled_independently():
    train = np.array([[0.0, 100.0], [10.0, 200.0]])
    params = fit_scaler(train)
    out = apply_scaler(params, np.array([[5.0, 150.0]]))
    np.testing.assert_allclose(out, [[0.0, 0.0]])


def test_empty_rejected():
    with pytest.raises(ParameterError):
        fit_scaler(np.zeros((0, 3)))


def test_sequence_scaler_fits_on_all_timesteps():
    seqs = [np.array([[0.0], [10.0]]), np.array([[5.0]])]
    params = fit_sequence_scaler(seqs)
    out = apply_sequence_scaler(params, seqs)
    np.testing.assert_allclose(out[0][:, 0], [-1.0, 1.0])
    np.testing.assert_allclose(out[1][:, 0], [0.0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=2),
                min_size=2, max_size=20))
def test_training_data_always_lands_in_unit_interval(rows):
    train = np.asarray(rows)
    params = fit_scaler(train)
    out = apply_scaler(params, train)
    assert np.all(out >= -1.0 - 1e-9)
    assert np.all(out <= 1.0 + 1e-9)
