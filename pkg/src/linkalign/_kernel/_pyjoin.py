"""Pure-Python multiset hash join over integer-encoded rows.

Reference semantics for the compiled kernel: identical inputs must produce
an identical output array, including row order. Rows are emitted in right-row
order, and within one right row in ascending left-row order.
"""

from __future__ import annotations

import numpy as np


def hash_join(
    left: np.ndarray,
    right: np.ndarray,
    left_keys: tuple[int, ...],
    right_keys: tuple[int, ...],
    right_carry: tuple[int, ...],
) -> np.ndarray:
    """Join two row tables on paired key columns.

    Output rows are each matching left row followed by the right row's carry
    columns. With no key columns this degenerates to the cross product.
    """
    if len(left_keys) != len(right_keys):
        raise ValueError("key column lists must pair up")
    n_left, w_left = left.shape
    n_right = right.shape[0]
    out_width = w_left + len(right_carry)

    if n_left == 0 or n_right == 0:
        return np.empty((0, out_width), dtype=np.int64)

    left_rows = left.tolist()
    right_rows = right.tolist()

    buckets: dict[tuple[int, ...], list[int]] = {}
    for i, row in enumerate(left_rows):
        key = tuple(row[k] for k in left_keys)
        buckets.setdefault(key, []).append(i)

    out: list[list[int]] = []
    for row in right_rows:
        key = tuple(row[k] for k in right_keys)
        matches = buckets.get(key)
        if not matches:
            continue
        carry = [row[c] for c in right_carry]
        for i in matches:
            out.append(left_rows[i] + carry)

    if not out:
        return np.empty((0, out_width), dtype=np.int64)
    return np.array(out, dtype=np.int64)
