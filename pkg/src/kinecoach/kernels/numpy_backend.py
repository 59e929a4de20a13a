"""Pure-NumPy implementations of the hot per-frame kernels.

These are the reference semantics; the compiled extension in
``_ckernels.pyx`` mirrors them operation for operation so that both
backends agree to floating-point noise.
"""

import numpy as np

TWO_PI = 2.0 * np.pi

# Rays shorter than this cannot define a direction.
DEGENERATE_NORM = 1e-9


def central_diff(values, dt):
    """Central difference (x[t+1] - x[t-1]) / (2 dt) over interior samples.

    values: (T,) or (T, D) array with T >= 3. Returns length T - 2,
    covering samples 1 .. T-2 of the input.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.shape[0] < 3:
        raise ValueError("central_diff needs at least 3 samples")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    return (v[2:] - v[:-2]) / (2.0 * dt)


def angle_series(a, b, c):
    """Per-frame angle at vertex b between rays (a-b) and (c-b), in radians.

    Inputs are (T, 3) arrays. Frames where either ray is shorter than
    DEGENERATE_NORM yield NaN; everything else lands in [0, pi] (the
    cosine is clamped before arccos).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    u = a - b
    w = c - b
    nu = np.sqrt(np.sum(u * u, axis=1))
    nw = np.sqrt(np.sum(w * w, axis=1))
    out = np.full(u.shape[0], np.nan)
    ok = (nu >= DEGENERATE_NORM) & (nw >= DEGENERATE_NORM)
    cosang = np.sum(u * w, axis=1)[ok] / (nu[ok] * nw[ok])
    out[ok] = np.arccos(np.clip(cosang, -1.0, 1.0))
    return out


def unwrap_angles(theta):
    """Unwrap an angle series so successive differences lie in (-pi, pi].

    The first sample is kept as-is; each later sample is the previous
    output plus the wrapped raw difference. Input must be NaN-free.
    """
    th = np.asarray(theta, dtype=np.float64)
    out = np.empty_like(th)
    if th.size == 0:
        return out
    d = th[1:] - th[:-1]
    m = (d + np.pi) % TWO_PI - np.pi
    m[m == -np.pi] = np.pi
    out[0] = th[0]
    out[1:] = th[0] + np.cumsum(m)
    return out


def fill_gaps(values):
    """Fill NaN entries per column by linear interpolation.

    Interior gaps are interpolated between the nearest finite samples;
    leading/trailing gaps hold the nearest finite value. Raises
    ValueError when a column has no finite sample at all.
    """
    v = np.array(values, dtype=np.float64)
    squeeze = v.ndim == 1
    if squeeze:
        v = v[:, None]
    for d in range(v.shape[1]):
        col = v[:, d]
        finite = np.flatnonzero(np.isfinite(col))
        if finite.size == 0:
            raise ValueError(f"column {d} has no finite samples")
        missing = np.flatnonzero(~np.isfinite(col))
        if missing.size == 0:
            continue
        right = np.searchsorted(finite, missing)
        lead = right == 0
        trail = right == finite.size
        interior = ~lead & ~trail
        col[missing[lead]] = col[finite[0]]
        col[missing[trail]] = col[finite[-1]]
        mi = missing[interior]
        i0 = finite[right[interior] - 1]
        i1 = finite[right[interior]]
        frac = (mi - i0).astype(np.float64) / (i1 - i0).astype(np.float64)
        col[mi] = col[i0] + (col[i1] - col[i0]) * frac
    return v[:, 0] if squeeze else v
