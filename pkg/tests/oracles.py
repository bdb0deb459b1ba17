"""Slow, independent reference implementations used only by the tests.

Nothing here imports the package's numerical routines except plain data types,
so every agreement test compares two unrelated computations.
"""
from __future__ import annotations

import itertools
import math
from collections import deque

import numpy as np
from scipy import integrate as sp_integrate
from scipy import sparse
from scipy.sparse.linalg import expm_multiply

# erf at 20 points, 30 significant digits from mpmath (frozen)
ERF_TABLE = {
    -3.0: -0.99997790950300141455862722387,
    -2.0: -0.995322265018952734162069256367,
    -1.25: -0.922900128256458230136523481197,
    -0.5: -0.520499877813046537682746653892,
    -0.1: -0.112462916018284898404712251014,
    0.0: 0.0,
    0.001: 0.00112837879096923640343756413937,
    0.05: 0.0563719777970166269553325177985,
    0.1: 0.112462916018284898404712251014,
    0.25: 0.276326390168236932985068267765,
    0.45015815807855303: 0.475627457145672237505353651713,
    0.5: 0.520499877813046537682746653892,
    0.75: 0.711155633653515131598937834591,
    1.0: 0.842700792949714869341220635083,
    1.5: 0.966105146475310727066976261646,
    2.0: 0.995322265018952734162069256367,
    2.5: 0.99959304798255504106043578426,
    3.0: 0.99997790950300141455862722387,
    4.0: 0.99999998458274209971998114784,
    5.0: 0.99999999999846254020557196515,
}


def cyclic_window_sums(field: np.ndarray) -> list[float]:
    """Sums over every lifted window (x, y] with 0 <= x < 2N and length 0..2N."""
    m = field.size
    out = []
    for x in range(m):
        for length in range(m + 1):
            out.append(sum(field[(x + k) % m] for k in range(1, length + 1)))
    return out


def brute_deviation(eta, alpha: float, theta: float, t: float) -> float:
    v = np.asarray(eta, dtype=np.float64)
    n = v.size // 2
    lam = 2 * (1 - math.cos(math.pi / n))
    x = np.arange(1, 2 * n + 1)
    f = v - alpha * math.exp(-lam * t) * np.sin(np.pi * x / n + theta)
    # field index k holds site k + 1, so window (x, y] covers indices x..y-1
    return max(abs(s) for s in cyclic_window_sums(np.roll(f, 1)))


def rk4_heat(u0: np.ndarray, t: float, dt: float = 1e-4) -> np.ndarray:
    u = np.array(u0, dtype=np.float64)

    def rhs(w):
        return np.roll(w, 1) + np.roll(w, -1) - 2 * w

    steps = int(round(t / dt))
    h = t / steps
    for _ in range(steps):
        k1 = rhs(u)
        k2 = rhs(u + 0.5 * h * k1)
        k3 = rhs(u + 0.5 * h * k2)
        k4 = rhs(u + h * k3)
        u = u + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return u


def balanced_states(n: int) -> list[tuple[int, ...]]:
    """All balanced +/-1 tuples in lexicographic order of particle sets."""
    out = []
    for sites in itertools.combinations(range(2 * n), n):
        v = [-1] * (2 * n)
        for s in sites:
            v[s] = 1
        out.append(tuple(v))
    return out


def dense_generator(n: int) -> tuple[np.ndarray, dict]:
    states = balanced_states(n)
    index = {s: i for i, s in enumerate(states)}
    q = np.zeros((len(states), len(states)))
    for s, i in index.items():
        for x in range(2 * n):
            y = (x + 1) % (2 * n)
            if s[x] != s[y]:
                u = list(s)
                u[x], u[y] = u[y], u[x]
                q[i, index[tuple(u)]] += 1
                q[i, i] -= 1
    return q, index


def eig_semigroup(q: np.ndarray, t: float) -> np.ndarray:
    """e^{tQ} for symmetric Q by eigendecomposition."""
    w, v = np.linalg.eigh(q)
    return (v * np.exp(t * w)) @ v.T


def tilted_enumeration(n: int, alpha: float, theta: float) -> np.ndarray:
    x = np.arange(1, 2 * n + 1)
    w = np.sin(np.pi * x / n + theta)
    logs = np.array([alpha * float(np.dot(s, w)) for s in balanced_states(n)])
    p = np.exp(logs - logs.max())
    return p / p.sum()


# -- graphical construction by explicit event lists --------------------------


def _corner(h, x):
    m = len(h)
    left, right = h[(x - 1) % m], h[(x + 1) % m]
    if left != right:
        return -1
    return 0 if h[x] > left else 1


def naive_coupling(heights, t_end: float, ring_times, margin: int = 40):
    """Replay the graphical construction from a complete list of rings.

    ``ring_times(direction, site0, level, t_end)`` returns the sorted rings of
    one clock.  All clocks with levels inside the initial range +/- margin are
    listed up front and merged into one time-ordered stream; every ring is
    applied to all trajectories that have the matching corner.
    Returns (final heights, events applied).
    """
    h = [list(map(int, r)) for r in heights]
    m = len(h[0])
    lo = min(min(r) for r in h) - margin
    hi = max(max(r) for r in h) + margin
    rings = []
    for x in range(m):
        for z in range(lo, hi + 1):
            if (z - (x + 1)) % 2:
                continue
            for d in (0, 1):
                rings.extend((t, d, x, z) for t in ring_times(d, x, z, t_end))
    rings.sort()
    events = 0
    for t, d, x, z in rings:
        for r in h:
            if r[x] == z and _corner(r, x) == d:
                if not lo + 2 < z < hi - 2:
                    raise RuntimeError("trajectory left the listed level range")
                r[x] += -2 if d == 0 else 2
                events += 1
    return np.array(h), events


# -- two-path product chain -----------------------------------------------------


def _pair_moves(a, b):
    """Transitions of the shared-clock pair (a, b) with their rates."""
    moves = []
    m = len(a)
    for x in range(m):
        ca, cb = _corner(a, x), _corner(b, x)
        if ca >= 0 and cb == ca and a[x] == b[x]:
            na, nb = list(a), list(b)
            step = -2 if ca == 0 else 2
            na[x] += step
            nb[x] += step
            moves.append((tuple(na), tuple(nb)))
            continue
        if ca >= 0:
            na = list(a)
            na[x] += -2 if ca == 0 else 2
            moves.append((tuple(na), tuple(b)))
        if cb >= 0:
            nb = list(b)
            nb[x] += -2 if cb == 0 else 2
            moves.append((tuple(a), tuple(nb)))
    return moves


def _normal(a, b):
    s = a[-1]
    return tuple(v - s for v in a), tuple(v - s for v in b)


def truncated_coalescence_mean(lower, upper, t0: float, area_cap: int) -> tuple[float, float]:
    """E[min(tau, t0)] for the shared-clock pair, by the exact product chain.

    States are pairs modulo a common even shift; pairs whose area exceeds
    ``area_cap`` go to an absorbing overflow state counted as uncoalesced.
    Returns (E[min(tau, t0)], probability of overflow by t0).
    """
    start = _normal(tuple(map(int, lower)), tuple(map(int, upper)))
    index = {start: 0}
    queue = deque([start])
    rows, cols = [], []
    coalesced = "C"
    overflow = "O"
    extra = {coalesced: None, overflow: None}
    edges = []
    while queue:
        st = queue.popleft()
        a, b = st
        for na, nb in _pair_moves(a, b):
            if na == nb:
                edges.append((index[st], coalesced))
                continue
            area = (sum(nb) - sum(na)) // 2
            if area > area_cap:
                edges.append((index[st], overflow))
                continue
            key = _normal(na, nb)
            if key not in index:
                index[key] = len(index)
                queue.append(key)
            edges.append((index[st], index[key]))
    n = len(index)
    extra[coalesced] = n
    extra[overflow] = n + 1
    for i, j in edges:
        rows.append(i)
        cols.append(extra.get(j, j) if isinstance(j, str) else j)
    size = n + 2
    off = sparse.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(size, size)).tocsr()
    q = off - sparse.diags(np.asarray(off.sum(axis=1)).ravel())
    p0 = np.zeros(size)
    p0[0] = 1.0
    grid = np.linspace(0.0, t0, 401)
    traj = expm_multiply(q.T.tocsc(), p0, start=0.0, stop=t0, num=grid.size, endpoint=True)
    survival = 1.0 - traj[:, n]
    return float(sp_integrate.simpson(survival, x=grid)), float(traj[-1, n + 1])
