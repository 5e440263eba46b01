"""Low-level walk engines: counter-based uniforms and windowed step loops.

Randomness
----------
Every walk consumes uniforms from an immutable *random field*: a pure
function ``(seed, site, visit_index) -> U in (0, 1)`` built from three
chained applications of the 64-bit murmur finalizer.  The walk at site
``x`` whose local time (including the current visit) is ``i`` uses the
uniform keyed ``(x, i)``.  Because the value depends only on the key and
never on query order, two walks driven by the same seed share uniforms at
matched visit clocks, which is exactly what the pathwise comparisons in
:mod:`vrrwlab.coupling` need.

Step loops
----------
The site and oriented-edge local times live in dense integer windows over
a site interval; the window is grown geometrically whenever the walk
reaches its edge, so the amortized cost stays linear while localized runs
keep tiny footprints.  The loop exists twice with identical semantics:

* a pure-Python reference (always available, used for cross-checking and
  as the fallback when numba is absent or ``VRRW_LAB_NO_JIT`` is set);
* a numba-compiled twin (``nogil``, cached) for campaign-scale runs.

Both record the full position trace and, on request, the per-time-index
forensic row (visit index, left/right neighbour local times) that the
coupling layer joins on.  Transition probabilities are read from
precomputed weight tables indexed by integer counts, so the Python and
compiled paths produce bit-identical trajectories.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass

import numpy as np

__all__ = [
    "K_VRRW",
    "K_REFLECTED",
    "K_TILDE",
    "K_HAT",
    "K_HAT_RESTRICTED",
    "K_BREVE",
    "NO_FLOOR",
    "NO_CEILING",
    "fmix64",
    "field_uniform",
    "jit_available",
    "run_window",
    "run_batch_endpoints",
    "WindowState",
]

# walk-kind codes shared with vrrwlab.walks
K_VRRW = 0
K_REFLECTED = 1
K_TILDE = 2
K_HAT = 3
K_HAT_RESTRICTED = 4
K_BREVE = 5

# sentinels for "no reflecting boundary on this side"
NO_FLOOR = -(2**62)
NO_CEILING = 2**62

_MASK64 = (1 << 64) - 1
_INV53 = 2.0**-53


# ---------------------------------------------------------------------------
# counter-based uniforms (pure-Python reference)
# ---------------------------------------------------------------------------

def fmix64(h: int) -> int:
    """64-bit murmur3 finalizer on Python ints (wraparound via masking)."""
    h &= _MASK64
    h ^= h >> 33
    h = (h * 0xFF51AFD7ED558CCD) & _MASK64
    h ^= h >> 33
    h = (h * 0xC4CEB9FE1A85EC53) & _MASK64
    h ^= h >> 33
    return h


def field_uniform(seed: int, site: int, visit: int) -> float:
    """Uniform in (0, 1) keyed by ``(seed, site, visit)``.

    Three finalizer rounds give full avalanche between the key parts; the
    top 53 bits centre on half-integers so the result is never exactly 0
    or 1 (forced moves at reflecting boundaries stay forced).
    """
    h = fmix64(seed)
    h = fmix64(h ^ (site & _MASK64))
    h = fmix64(h ^ (visit & _MASK64))
    return ((h >> 11) + 0.5) * _INV53


# ---------------------------------------------------------------------------
# step loop (pure-Python reference)
# ---------------------------------------------------------------------------

def _run_window_py(kind, gamma, floor, ceiling, offset, z, ne,
                   w_site, w_edge, w_edge0, pos, k, n_steps, seed,
                   trace, record, visit_out, zl_out, zr_out):
    """Advance the walk until ``n_steps`` steps are done or the window edge
    is reached.  Returns ``(pos, k, status)`` with status 0 = finished,
    1 = needs a larger window.  Row ``k`` of the forensic arrays describes
    time index ``k`` (position ``trace[k]``, its visit count, neighbour
    local times); the row for the final time index is recorded too.
    """
    size = z.shape[0]
    while True:
        i = pos + offset
        if i - 1 < 0 or i + 1 > size - 1:
            return pos, k, 1
        visit = int(z[i])
        if record:
            visit_out[k] = visit
            zl_out[k] = z[i - 1]
            zr_out[k] = z[i + 1]
        if k >= n_steps:
            return pos, k, 0
        u = field_uniform(seed, pos, visit)
        if kind == K_BREVE and pos == 0:
            nxt = 1 if u >= 1.0 - gamma else 0
        else:
            if pos == floor:
                p_left = 0.0
            elif pos == ceiling:
                p_left = 1.0
            else:
                a = w_site[z[i - 1]]
                if kind <= K_REFLECTED:
                    b = w_site[z[i + 1]]
                elif kind >= K_HAT and kind != K_BREVE:
                    m = ne[i]
                    b = w_edge0[m] if pos == 0 else w_edge[m]
                else:
                    b = w_edge[ne[i]]
                p_left = a / (a + b)
            nxt = pos - 1 if u <= p_left else pos + 1
        if nxt == pos + 1:
            ne[i] += 1
        z[nxt + offset] += 1
        pos = nxt
        k += 1
        trace[k] = pos


def _run_batch_py(kind, gamma, floor, ceiling, offset, z0, ne0,
                  w_site, w_edge, w_edge0, seeds, n_steps, endpoints):
    z = np.empty_like(z0)
    ne = np.empty_like(ne0)
    trace = np.zeros(n_steps + 1, dtype=np.int32)
    dummy = np.zeros(1, dtype=np.int64)
    for s in range(seeds.shape[0]):
        z[:] = z0
        ne[:] = ne0
        z[offset] += 1
        pos, k, status = _run_window_py(
            kind, gamma, floor, ceiling, offset, z, ne,
            w_site, w_edge, w_edge0, 0, 0, n_steps, int(seeds[s]),
            trace, False, dummy, dummy, dummy)
        if status != 0:
            raise RuntimeError("batch window too small for requested horizon")
        endpoints[s] = pos


# ---------------------------------------------------------------------------
# numba twins
# ---------------------------------------------------------------------------

_JIT = None          # (run_window, run_batch) once compiled
_JIT_FAILED = False
_JIT_LOCK = threading.Lock()


def _build_jit():
    import numba

    u64 = np.uint64
    C1 = u64(0xFF51AFD7ED558CCD)
    C2 = u64(0xC4CEB9FE1A85EC53)
    S33 = u64(33)
    S11 = u64(11)

    @numba.njit(cache=True, nogil=True, inline="always")
    def _fmix(h):
        h ^= h >> S33
        h *= C1
        h ^= h >> S33
        h *= C2
        h ^= h >> S33
        return h

    @numba.njit(cache=True, nogil=True, inline="always")
    def _uniform(seed, site, visit):
        h = _fmix(seed)
        h = _fmix(h ^ u64(site))
        h = _fmix(h ^ u64(visit))
        return (np.float64(h >> S11) + 0.5) * _INV53

    @numba.njit(cache=True, nogil=True)
    def _run_window(kind, gamma, floor, ceiling, offset, z, ne,
                    w_site, w_edge, w_edge0, pos, k, n_steps, seed,
                    trace, record, visit_out, zl_out, zr_out):
        size = z.shape[0]
        while True:
            i = pos + offset
            if i - 1 < 0 or i + 1 > size - 1:
                return pos, k, 1
            visit = z[i]
            if record:
                visit_out[k] = visit
                zl_out[k] = z[i - 1]
                zr_out[k] = z[i + 1]
            if k >= n_steps:
                return pos, k, 0
            u = _uniform(seed, np.int64(pos), visit)
            if kind == K_BREVE and pos == 0:
                nxt = 1 if u >= 1.0 - gamma else 0
            else:
                if pos == floor:
                    p_left = 0.0
                elif pos == ceiling:
                    p_left = 1.0
                else:
                    a = w_site[z[i - 1]]
                    if kind <= K_REFLECTED:
                        b = w_site[z[i + 1]]
                    elif kind >= K_HAT and kind != K_BREVE:
                        m = ne[i]
                        b = w_edge0[m] if pos == 0 else w_edge[m]
                    else:
                        b = w_edge[ne[i]]
                    p_left = a / (a + b)
                nxt = pos - 1 if u <= p_left else pos + 1
            if nxt == pos + 1:
                ne[i] += 1
            z[nxt + offset] += 1
            pos = nxt
            k += 1
            trace[k] = pos

    @numba.njit(cache=True, nogil=True)
    def _run_batch(kind, gamma, floor, ceiling, offset, z0, ne0,
                   w_site, w_edge, w_edge0, seeds, n_steps, endpoints):
        z = np.empty_like(z0)
        ne = np.empty_like(ne0)
        trace = np.zeros(n_steps + 1, dtype=np.int32)
        dummy = np.zeros(1, dtype=np.int64)
        for s in range(seeds.shape[0]):
            z[:] = z0
            ne[:] = ne0
            z[offset] += 1
            pos, k, status = _run_window(
                kind, gamma, floor, ceiling, offset, z, ne,
                w_site, w_edge, w_edge0, 0, 0, n_steps, seeds[s],
                trace, False, dummy, dummy, dummy)
            if status != 0:
                endpoints[s] = NO_CEILING
            else:
                endpoints[s] = pos

    return _run_window, _run_batch


def jit_available() -> bool:
    """True when the numba twins are usable (and not disabled via env)."""
    return _get_jit() is not None


def _get_jit():
    global _JIT, _JIT_FAILED
    if os.environ.get("VRRW_LAB_NO_JIT"):
        return None
    if _JIT is None and not _JIT_FAILED:
        with _JIT_LOCK:
            if _JIT is None and not _JIT_FAILED:
                try:
                    _JIT = _build_jit()
                except ImportError:
                    _JIT_FAILED = True
    return _JIT


# ---------------------------------------------------------------------------
# windowed driver
# ---------------------------------------------------------------------------

@dataclass
class WindowState:
    """Dense local-time window: site ``x`` lives at array index ``x + offset``."""

    z: np.ndarray
    ne: np.ndarray
    offset: int

    def site_range(self) -> tuple[int, int]:
        return -self.offset, self.z.shape[0] - 1 - self.offset

    def grow(self, pad: int) -> "WindowState":
        old = self.z.shape[0]
        z = np.zeros(old + 2 * pad, dtype=np.int64)
        ne = np.zeros(old + 2 * pad, dtype=np.int64)
        z[pad:pad + old] = self.z
        ne[pad:pad + old] = self.ne
        return WindowState(z, ne, self.offset + pad)


def make_window(z_map: dict, ne_map: dict, pad: int = 8) -> WindowState:
    """Dense window covering the sparse initial counts plus the origin."""
    sites = [0] + list(z_map) + list(ne_map)
    lo, hi = min(sites) - pad, max(sites) + pad
    offset = -lo
    z = np.zeros(hi - lo + 1, dtype=np.int64)
    ne = np.zeros(hi - lo + 1, dtype=np.int64)
    for x, c in z_map.items():
        z[x + offset] = c
    for x, c in ne_map.items():
        ne[x + offset] = c
    return WindowState(z, ne, offset)


def run_window(kind_code: int, gamma: float, floor: int, ceiling: int,
               window: WindowState, tables, n_steps: int, seed: int,
               record: bool = False):
    """Run ``n_steps`` steps from time 0 (origin already counted in window).

    Returns ``(trace, window, position, rows)`` where ``trace`` is the
    int32 position sequence ``X_0..X_n`` and ``rows`` is ``None`` or the
    ``(visit, z_left, z_right)`` triple of int64 arrays, one entry per time
    index.  The window is regrown geometrically whenever the walk reaches
    its edge.
    """
    w_site, w_edge, w_edge0 = tables
    trace = np.zeros(n_steps + 1, dtype=np.int32)
    if record:
        visit_out = np.zeros(n_steps + 1, dtype=np.int64)
        zl_out = np.zeros(n_steps + 1, dtype=np.int64)
        zr_out = np.zeros(n_steps + 1, dtype=np.int64)
    else:
        visit_out = zl_out = zr_out = np.zeros(1, dtype=np.int64)

    jit = _get_jit()
    if jit is not None:
        kernel = jit[0]
        seed_arg = np.uint64(seed)
    else:
        kernel = _run_window_py
        seed_arg = int(seed)

    pos, k = 0, 0
    while True:
        pos, k, status = kernel(
            kind_code, float(gamma), floor, ceiling, window.offset,
            window.z, window.ne, w_site, w_edge, w_edge0,
            pos, k, n_steps, seed_arg, trace, record,
            visit_out, zl_out, zr_out)
        if status == 0:
            break
        window = window.grow(max(64, window.z.shape[0]))
    rows = (visit_out, zl_out, zr_out) if record else None
    return trace, window, pos, rows


def run_batch_endpoints(kind_code: int, gamma: float, floor: int, ceiling: int,
                        window: WindowState, tables, n_steps: int,
                        seeds: np.ndarray) -> np.ndarray:
    """Final positions of many seeds over a short fixed horizon.

    The window must already be wide enough for any ``n_steps``-step path
    (callers pad by ``n_steps``); horizons that could escape it are
    rejected.  Used for endpoint-law Monte Carlo where per-run Python
    overhead would otherwise dominate.
    """
    w_site, w_edge, w_edge0 = tables
    lo, hi = window.site_range()
    if lo > -(n_steps + 2) or hi < n_steps + 2:
        raise ValueError("batch window must pad the horizon on both sides")
    seeds = np.asarray(seeds, dtype=np.uint64)
    endpoints = np.zeros(seeds.shape[0], dtype=np.int64)
    jit = _get_jit()
    if jit is not None:
        jit[1](kind_code, float(gamma), floor, ceiling, window.offset,
               window.z, window.ne, w_site, w_edge, w_edge0,
               seeds, n_steps, endpoints)
        if np.any(endpoints == NO_CEILING):
            raise RuntimeError("batch window too small for requested horizon")
    else:
        _run_batch_py(kind_code, float(gamma), floor, ceiling, window.offset,
                      window.z, window.ne, w_site, w_edge, w_edge0,
                      seeds, n_steps, endpoints)
    return endpoints
