# src/utils/general_utility.py

import numpy as np

from .exceptions import DimensionMismatchError, InvalidArgumentError

def require_count(value: int, name: str, minimum: int = 1) -> int:
    """
    Validate a replication or batch count.

    Args:
        value (int): The count to check.
        name (str): Name used in the error message.
        minimum (int, optional): Smallest admissible value. Defaults to 1.

    Returns:
        int: The count as a plain int.

    Raises:
        InvalidArgumentError: If the value is not an integer or is below the minimum.

    Examples:
        >>> require_count(4, "M")
        4
        >>> require_count(1, "M", minimum=2)
        Traceback (most recent call last):
        ...
        src.utils.exceptions.InvalidArgumentError: M must be an integer >= 2, got 1
    """
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < minimum:
        raise InvalidArgumentError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)

def partition_counts(values: list[int], minimum: int = 1) -> tuple[list[int], list[int]]:
    """
    Split a list of counts (e.g. a sweep over M) into admissible and rejected values.

    Args:
        values (list[int]): Counts to check.
        minimum (int, optional): Smallest admissible value. Defaults to 1.

    Returns:
        tuple[list[int], list[int]]: (valid, invalid), both in input order.

    Raises:
        InvalidArgumentError: If the input list is empty.

    Examples:
        >>> partition_counts([1, 2, 0, 4], minimum=2)
        ([2, 4], [1, 0])
    """
    if not values:
        raise InvalidArgumentError("The list of counts to validate cannot be empty.")

    valid, invalid = [], []
    for value in values:
        if isinstance(value, (int, np.integer)) and not isinstance(value, bool) and value >= minimum:
            valid.append(int(value))
        else:
            invalid.append(value)
    return valid, invalid

def as_param_vector(x, dim: int) -> np.ndarray:
    """
    Coerce a decision variable to a finite float vector of the declared dimension.

    Args:
        x (array-like): Candidate parameter vector.
        dim (int): Declared problem dimension d.

    Returns:
        np.ndarray: 1-d float64 array of length dim.

    Raises:
        DimensionMismatchError: If the shape is not (dim,).
        InvalidArgumentError: If any entry is NaN or Inf.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0 and dim == 1:
        arr = arr.reshape(1)
    if arr.shape != (dim,):
        raise DimensionMismatchError(f"Parameter vector must have shape ({dim},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("Parameter vector contains non-finite entries")
    return arr

def check_vector(v, dim: int, name: str = "v") -> np.ndarray:
    """
    Coerce an inner value vector (an element of R^k) and check its length.

    Args:
        v (array-like): The vector.
        dim (int): Expected length.
        name (str, optional): Name used in the error message.

    Returns:
        np.ndarray: 1-d float64 array.

    Raises:
        DimensionMismatchError: If the length differs from dim.
    """
    arr = np.atleast_1d(np.asarray(v, dtype=np.float64))
    if arr.shape != (dim,):
        raise DimensionMismatchError(f"{name} must have shape ({dim},), got {arr.shape}")
    return arr
