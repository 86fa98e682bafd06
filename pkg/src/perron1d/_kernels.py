"""Hot numeric loops, compiled with numba when available.

Set PERRON1D_DISABLE_NUMBA=1 to force the pure numpy/Python fallbacks;
the same happens automatically when numba fails to import.  Both paths
obey the same exactness contract:

* integer orbit arithmetic is exact (int64 in the compiled path, with an
  explicit overflow guard that bails out rather than wrap);
* floating point only ever decides a sign when the value clears a
  conservative error bound; anything closer to zero is reported back to
  the caller as ambiguous so exact arithmetic can take over.

``benchmarks/bench_kernels.py`` times the two paths against each other.
"""

from __future__ import annotations

import os

import numpy as np

USE_NUMBA = os.environ.get("PERRON1D_DISABLE_NUMBA", "") not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is an install-time dep
        USE_NUMBA = False

# Status codes shared by orbit kernels.
STATUS_CYCLE = 0
STATUS_CAP = 1
STATUS_OVERFLOW = 2
STATUS_AMBIGUOUS = 3

# Guard factor for float sign decisions; see module docstring.
SIGN_GUARD = 1e-9

# Coordinates stay below this so one multiply-accumulate cannot overflow.
_INT64_SAFE = 1 << 61


def _tent_orbit_impl(red, lam_pows, cap, orbit, table, qden):
    """Iterate x -> lam*|x| - 1 exactly in power-basis int64 coordinates.

    red: low coefficients m_0..m_{d-1} of the monic minimal polynomial, so
    lam^d = -(m_0 + m_1 lam + ... + m_{d-1} lam^{d-1}).
    orbit: preallocated (cap+2, d) output, orbit[k] = coords of f^k(x0)
    scaled by qden.  table: open-addressing hash table (size power of 2).
    Returns (status, steps, preperiod, period).
    """
    d = red.shape[0]
    mask = table.shape[0] - 1
    maxred = 0
    for j in range(d):
        a = red[j]
        if a < 0:
            a = -a
        if a > maxred:
            maxred = a
    limit = _INT64_SAFE // (1 + maxred)
    hmask = (1 << 48) - 1

    for step in range(cap + 1):
        # hash current coords (orbit[step] already holds them)
        h = 0
        big = 0
        for j in range(d):
            c = orbit[step, j]
            a = c if c >= 0 else -c
            if a > big:
                big = a
            h = (h ^ ((c & hmask) + 0x9E3779B9 + ((h << 6) & hmask) + (h >> 2))) & hmask
        if big > limit:
            return STATUS_OVERFLOW, step, -1, -1
        # probe
        idx = h & mask
        while True:
            slot = table[idx]
            if slot == -1:
                table[idx] = step
                break
            same = True
            for j in range(d):
                if orbit[slot, j] != orbit[step, j]:
                    same = False
                    break
            if same:
                return STATUS_CYCLE, step, slot, step - slot
            idx = (idx + 1) & mask
        if step == cap:
            return STATUS_CAP, step, -1, -1
        # sign of the dominant embedding
        s = 0.0
        scale = 1.0
        for j in range(d):
            t = orbit[step, j] * lam_pows[j]
            s += t
            if t < 0.0:
                t = -t
            scale += t
        allzero = True
        for j in range(d):
            if orbit[step, j] != 0:
                allzero = False
                break
        if not allzero:
            if s < SIGN_GUARD * scale and s > -SIGN_GUARD * scale:
                return STATUS_AMBIGUOUS, step, -1, -1
        # |x|
        neg = s < 0.0 and not allzero
        # multiply by lam: shift up, reduce top coefficient
        top = orbit[step, d - 1]
        if neg:
            top = -top
        for j in range(d - 1, 0, -1):
            prev = orbit[step, j - 1]
            if neg:
                prev = -prev
            orbit[step + 1, j] = prev - top * red[j]
        orbit[step + 1, 0] = -top * red[0] - qden
    return STATUS_CAP, cap, -1, -1


def _cloud_impl(red, lam_pows, sig_re, sig_im, burn, total, coords, out):
    """Iterate the tent map exactly, recording (dominant, sigma) embeddings.

    coords: int64 work vector (current point, scaled by qden implicit in
    caller's setup of the -1 constant, which is baked into `qden` below).
    out: float64 (total-burn, 3) rows (x_dominant, z_re, z_im).
    Returns (status, step).
    """
    d = red.shape[0]
    maxred = 0
    for j in range(d):
        a = red[j]
        if a < 0:
            a = -a
        if a > maxred:
            maxred = a
    limit = _INT64_SAFE // (1 + maxred)
    qden = coords[d]  # caller packs the denominator after the coords
    scratch = np.zeros(d, dtype=np.int64)

    for step in range(total):
        s = 0.0
        scale = 1.0
        big = 0
        for j in range(d):
            c = coords[j]
            a = c if c >= 0 else -c
            if a > big:
                big = a
            t = c * lam_pows[j]
            s += t
            if t < 0.0:
                t = -t
            scale += t
        if big > limit:
            return STATUS_OVERFLOW, step
        allzero = big == 0
        if not allzero and -SIGN_GUARD * scale < s < SIGN_GUARD * scale:
            return STATUS_AMBIGUOUS, step
        if step >= burn:
            zr = 0.0
            zi = 0.0
            for j in range(d):
                zr += coords[j] * sig_re[j]
                zi += coords[j] * sig_im[j]
            out[step - burn, 0] = s / qden
            out[step - burn, 1] = zr / qden
            out[step - burn, 2] = zi / qden
        neg = s < 0.0 and not allzero
        top = coords[d - 1]
        if neg:
            top = -top
        for j in range(d - 1, 0, -1):
            prev = coords[j - 1]
            if neg:
                prev = -prev
            scratch[j] = prev - top * red[j]
        scratch[0] = -top * red[0] - qden
        for j in range(d):
            coords[j] = scratch[j]
    return STATUS_CYCLE, total


def _aberth_impl(coeffs, z, max_iters, tol):
    """Aberth-Ehrlich simultaneous root iteration, double precision.

    Returns the iteration count on convergence, -1 otherwise.  z is
    updated in place.
    """
    n = z.shape[0]
    d = coeffs.shape[0] - 1
    for it in range(max_iters):
        maxcorr = 0.0
        for i in range(n):
            zi = z[i]
            p = coeffs[d]
            dp = 0.0 + 0.0j
            for k in range(d - 1, -1, -1):
                dp = dp * zi + p
                p = p * zi + coeffs[k]
            if p == 0:
                continue
            if dp == 0:
                z[i] = zi + 1e-7 * (1.0 + abs(zi))
                maxcorr = 1.0
                continue
            w = p / dp
            s = 0.0 + 0.0j
            for j in range(n):
                if j != i:
                    dz = zi - z[j]
                    if dz == 0:
                        dz = 1e-13 * (1.0 + abs(zi))
                    s += 1.0 / dz
            denom = 1.0 - w * s
            if denom == 0:
                corr = w
            else:
                corr = w / denom
            z[i] = zi - corr
            ac = abs(corr)
            if ac > maxcorr:
                maxcorr = ac
        if maxcorr < tol * (1.0 + abs(z[0])):
            return it + 1
    return -1


if USE_NUMBA:
    tent_orbit_kernel = njit(cache=True)(_tent_orbit_impl)
    cloud_kernel = njit(cache=True)(_cloud_impl)
    aberth_kernel = njit(cache=True)(_aberth_impl)
else:
    tent_orbit_kernel = _tent_orbit_impl
    cloud_kernel = _cloud_impl
    aberth_kernel = _aberth_impl


def backend_name() -> str:
    return "numba" if USE_NUMBA else "fallback"


def table_for(cap: int) -> np.ndarray:
    size = 1
    while size < 2 * (cap + 2):
        size <<= 1
    return np.full(size, -1, dtype=np.int64)
