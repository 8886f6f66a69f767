"""Pure-Python counting kernel (fallback when the compiled core is absent)."""

NAME = "python"


def at_most_rows(n_max, m, keep_all=False, widths=None):
    """Rows of |P_N(k)| for N = 0..n_max.

    Uses the conjugate form: partitions into at most k parts are equinumerous
    with partitions into parts of size at most k, so row k is row k-1 with
    parts of size k admitted.

    Parameters
    ----------
    n_max : int
        Largest total.
    m : int
        Largest part count.
    keep_all : bool
        Return rows 0..m instead of row m only.
    widths : ignored
        Accepted for signature compatibility with the compiled kernel.

    Returns
    -------
    list of list of int
        ``rows[k][N] = |P_N(k)|`` when ``keep_all``; otherwise ``[row_m]``.
    """
    if n_max < 0 or m < 0:
        raise ValueError("n_max and m must be nonnegative")
    row = [0] * (n_max + 1)
    row[0] = 1
    out = [list(row)] if keep_all else None
    for k in range(1, m + 1):
        for i in range(k, n_max + 1):
            row[i] += row[i - k]
        if keep_all:
            out.append(list(row))
    return out if keep_all else [row]
