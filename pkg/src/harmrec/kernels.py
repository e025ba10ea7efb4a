"""Hot numeric kernels: conjugate-gradient solve of the 5-point Laplace system.

Two interchangeable implementations of the same iteration:

* a numba ``@njit`` kernel (default when numba imports cleanly), and
* a pure-numpy sliced fallback.

Selection: pass ``backend="numba"|"numpy"`` explicitly, or leave it ``None``
to resolve from the environment — setting ``HARMREC_NO_NUMBA`` to anything
non-empty forces the numpy path.  Both paths run the identical algorithm in
float64 without fastmath, so results agree to solver tolerance (they are not
bit-identical: summation order differs).

The linear system is the h²-scaled interior 5-point stencil
``4*u[j,i] - u[j,i-1] - u[j,i+1] - u[j-1,i] - u[j+1,i] = 0`` with Dirichlet
values held fixed on the array rim.  The caller passes ``u`` with boundary
values already written and the interior zeroed; the kernel updates the
interior in place and reports (iterations, final l2 residual).  Iteration
stops once the l2 residual drops below ``tol * max(1, |b|_inf)`` where ``b``
is the initial residual (the boundary-data load vector), so the max-norm
stencil residual of the result is below the same threshold.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap


def resolve_backend(backend: str | None = None) -> str:
    """Resolve the kernel backend name ("numba" or "numpy")."""
    if backend is None:
        if os.environ.get("HARMREC_NO_NUMBA"):
            return "numpy"
        return "numba" if HAVE_NUMBA else "numpy"
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown kernel backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    return backend


@njit(cache=True, nogil=True)
def _cg_numba(u, tol, max_iter):  # pragma: no cover - covered via dispatch tests
    ny, nx = u.shape
    r = np.zeros((ny, nx))
    b_inf = 0.0
    rs = 0.0
    for j in range(1, ny - 1):
        for i in range(1, nx - 1):
            v = u[j, i - 1] + u[j, i + 1] + u[j - 1, i] + u[j + 1, i] - 4.0 * u[j, i]
            r[j, i] = v
            rs += v * v
            if abs(v) > b_inf:
                b_inf = abs(v)
    stop = tol * max(1.0, b_inf)
    if np.sqrt(rs) <= stop:
        return 0, np.sqrt(rs)
    p = r.copy()
    ap = np.zeros((ny, nx))
    it = 0
    while it < max_iter:
        it += 1
        pap = 0.0
        for j in range(1, ny - 1):
            for i in range(1, nx - 1):
                v = 4.0 * p[j, i] - p[j, i - 1] - p[j, i + 1] - p[j - 1, i] - p[j + 1, i]
                ap[j, i] = v
                pap += v * p[j, i]
        if pap <= 0.0:
            break
        alpha = rs / pap
        rs_new = 0.0
        for j in range(1, ny - 1):
            for i in range(1, nx - 1):
                u[j, i] += alpha * p[j, i]
                r[j, i] -= alpha * ap[j, i]
                rs_new += r[j, i] * r[j, i]
        if np.sqrt(rs_new) <= stop:
            return it, np.sqrt(rs_new)
        beta = rs_new / rs
        rs = rs_new
        for j in range(1, ny - 1):
            for i in range(1, nx - 1):
                p[j, i] = r[j, i] + beta * p[j, i]
    return it, np.sqrt(rs)


def _cg_numpy(u, tol, max_iter):
    inner = (slice(1, -1), slice(1, -1))
    r = np.zeros_like(u)
    r[inner] = (
        u[1:-1, :-2] + u[1:-1, 2:] + u[:-2, 1:-1] + u[2:, 1:-1] - 4.0 * u[inner]
    )
    stop = tol * max(1.0, np.abs(r).max())
    rs = float(np.dot(r.ravel(), r.ravel()))
    if np.sqrt(rs) <= stop:
        return 0, np.sqrt(rs)
    p = r.copy()
    ap = np.zeros_like(u)
    it = 0
    while it < max_iter:
        it += 1
        ap[inner] = (
            4.0 * p[inner] - p[1:-1, :-2] - p[1:-1, 2:] - p[:-2, 1:-1] - p[2:, 1:-1]
        )
        pap = float(np.dot(ap.ravel(), p.ravel()))
        if pap <= 0.0:
            break
        alpha = rs / pap
        u[inner] += alpha * p[inner]
        r -= alpha * ap
        rs_new = float(np.dot(r.ravel(), r.ravel()))
        if np.sqrt(rs_new) <= stop:
            return it, np.sqrt(rs_new)
        p *= rs_new / rs
        p += r
        rs = rs_new
    return it, np.sqrt(rs)


def cg_dirichlet(u: np.ndarray, tol: float, max_iter: int,
                 backend: str | None = None) -> tuple[int, float]:
    """Run CG on the interior of ``u`` in place; boundary rim is the data.

    Returns (iterations, achieved l2 residual).  The caller decides whether
    the residual is acceptable.
    """
    name = resolve_backend(backend)
    if name == "numba":
        return _cg_numba(u, tol, max_iter)
    return _cg_numpy(u, tol, max_iter)


def stencil_residual(values: np.ndarray) -> np.ndarray:
    """Interior residual of the h²-scaled 5-point stencil, shape (ny-2, nx-2)."""
    return (
        4.0 * values[1:-1, 1:-1]
        - values[1:-1, :-2]
        - values[1:-1, 2:]
        - values[:-2, 1:-1]
        - values[2:, 1:-1]
    )
