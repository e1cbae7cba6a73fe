import random

import numpy as np
import pytest

from linkalign._kernel import BACKEND, get_backend, hash_join


def brute_join(left, right, left_keys, right_keys, right_carry):
    """Reference, ordering included: right-row major, left rows ascending."""
    out = []
    for j in range(right.shape[0]):
        for i in range(left.shape[0]):
            if all(left[i, lk] == right[j, rk] for lk, rk in zip(left_keys, right_keys)):
                out.append(list(left[i]) + [right[j, c] for c in right_carry])
    width = left.shape[1] + len(right_carry)
    return np.array(out, dtype=np.int64).reshape(len(out), width)


def random_case(rng):
    w_left = rng.randrange(1, 4)
    w_right = rng.randrange(1, 4)
    n_keys = rng.randrange(0, min(w_left, w_right) + 1)
    left_keys = tuple(rng.sample(range(w_left), n_keys))
    right_keys = tuple(rng.sample(range(w_right), n_keys))
    carry = tuple(
        c for c in range(w_right) if c not in right_keys and rng.random() < 0.7
    )
    left = np.array(
        [[rng.randrange(4) for _ in range(w_left)] for _ in range(rng.randrange(0, 12))],
        dtype=np.int64,
    ).reshape(-1, w_left)
    right = np.array(
        [[rng.randrange(4) for _ in range(w_right)] for _ in range(rng.randrange(0, 12))],
        dtype=np.int64,
    ).reshape(-1, w_right)
    return left, right, left_keys, right_keys, carry


def test_default_backend_matches_brute_force():
    rng = random.Random(42)
    for _ in range(300):
        left, right, lk, rk, carry = random_case(rng)
        got = hash_join(left, right, lk, rk, carry)
        expected = brute_join(left, right, lk, rk, carry)
        assert got.shape == expected.shape
        assert np.array_equal(got, expected)


def test_python_and_compiled_backends_agree():
    names = {BACKEND, "python"}
    backends = [get_backend(n)[1] for n in sorted(names)]
    if len(backends) == 1:
        pytest.skip("only the python backend is available")
    rng = random.Random(7)
    for _ in range(300):
        left, right, lk, rk, carry = random_case(rng)
        outputs = [join(left, right, lk, rk, carry) for join in backends]
        assert np.array_equal(outputs[0], outputs[1])


def test_no_keys_is_a_cross_product():
    left = np.array([[1], [2]], dtype=np.int64)
    right = np.array([[10], [20]], dtype=np.int64)
    got = hash_join(left, right, (), (), (0,))
    assert got.tolist() == [[1, 10], [2, 10], [1, 20], [2, 20]]


def test_empty_inputs_produce_typed_empty_output():
    left = np.empty((0, 2), dtype=np.int64)
    right = np.array([[1, 2]], dtype=np.int64)
    got = hash_join(left, right, (0,), (0,), (1,))
    assert got.shape == (0, 3)
    assert got.dtype == np.int64


def test_mismatched_key_lists_are_rejected():
    left = np.array([[1]], dtype=np.int64)
    with pytest.raises(ValueError):
        hash_join(left, left, (0,), (), ())


def test_get_backend_names():
    name, join = get_backend("python")
    assert name == "python"
    assert callable(join)
    with pytest.raises(ValueError):
        get_backend("gpu")
    default_name, _ = get_backend()
    assert default_name == BACKEND
