from __future__ import annotations

import itertools

import numpy as np
import pytest
from scipy.special import xlogy

ACCEPTANCE_RESULTS: dict[int, list[tuple[bool, str]]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def record():
    """Log an acceptance sub-check; the summary hook prints one line per criterion."""

    def _record(criterion: int, ok: bool, detail: str) -> bool:
        ACCEPTANCE_RESULTS.setdefault(criterion, []).append((bool(ok), detail))
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(ACCEPTANCE_RESULTS):
        checks = ACCEPTANCE_RESULTS[c]
        ok = all(flag for flag, _ in checks)
        detail = "; ".join(d for _, d in checks)
        terminalreporter.write_line(f"criterion {c}: {'PASS' if ok else 'FAIL'} | {detail}")


# ---------------------------------------------------------------------------
# naive oracles shared by several test modules
# ---------------------------------------------------------------------------


def naive_entropy_objective(g, delta, tau):
    """<g, delta> - tau * sum delta ln delta, for a stack of candidate deltas."""
    return delta @ g - tau * xlogy(delta, delta).sum(axis=-1)


def simplex_grid(k: int, step: float) -> np.ndarray:
    m = int(round(1 / step))
    if k == 2:
        p = np.arange(m + 1) / m
        return np.stack([p, 1 - p], axis=1)
    if k == 3:
        i, j = np.meshgrid(np.arange(m + 1), np.arange(m + 1), indexing="ij")
        keep = i + j <= m
        a, b = i[keep] / m, j[keep] / m
        return np.stack([a, b, np.clip(1 - a - b, 0, None)], axis=1)
    raise ValueError("grid only for 2 or 3 actions")


def grid_argmax(g, tau, step=1e-3, refine_step=1e-5, refine_radius=2e-3):
    """Maximize <g, d> - tau * sum d ln d over the simplex by grid search and one refinement."""
    g = np.asarray(g, dtype=float)
    k = g.size
    grid = simplex_grid(k, step)
    best = grid[np.argmax(naive_entropy_objective(g, grid, tau))]
    offs = np.arange(-refine_radius, refine_radius + refine_step / 2, refine_step)
    if k == 2:
        p = np.clip(best[0] + offs, 0, 1)
        cand = np.stack([p, 1 - p], axis=1)
    else:
        da, db = np.meshgrid(offs, offs, indexing="ij")
        a = best[0] + da.ravel()
        b = best[1] + db.ravel()
        ok = (a >= 0) & (b >= 0) & (a + b <= 1)
        cand = np.stack([a[ok], b[ok], np.clip(1 - a[ok] - b[ok], 0, None)], axis=1)
    return cand[np.argmax(naive_entropy_objective(g, cand, tau))]


def naive_G(r, tables, j):
    """Score table of agent j by a plain loop over every (y, u) cell."""
    n = r.ndim // 2
    obs = r.shape[:n]
    act = r.shape[n:]
    out = np.zeros((obs[j], act[j]))
    for y in itertools.product(*(range(k) for k in obs)):
        for u in itertools.product(*(range(k) for k in act)):
            w = 1.0
            for i in range(n):
                if i != j:
                    w *= tables[i][y[i], u[i]] / obs[i]
            out[y[j], u[j]] += r[y + u] * w
    return out


def naive_J(r, tables):
    n = r.ndim // 2
    obs = r.shape[:n]
    act = r.shape[n:]
    total = 0.0
    for y in itertools.product(*(range(k) for k in obs)):
        for u in itertools.product(*(range(k) for k in act)):
            w = 1.0
            for i in range(n):
                w *= tables[i][y[i], u[i]] / obs[i]
            total += r[y + u] * w
    return total
