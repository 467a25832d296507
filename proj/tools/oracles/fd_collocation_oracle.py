#!/usr/bin/env python3
"""Dense-grid finite-difference oracles for 1D semilinear Dirichlet problems on (0, 1).

Each problem is -u'' = f(u) (or a symmetric coupled pair collapsed onto the
diagonal u = v) discretized by second-order central differences on n = 2000
or n = 2048 intervals and solved by Newton's method. The printed values are
frozen into tests/fixtures/fd_oracle.txt.

  scalar_inv   : -u'' = 1 / (u + 1)
  system_eps   : -u'' = lam (u + eps)^(-1/2) v^(1/2), -v'' = lam u^(1/2) (v + eps)^(-1/2),
                 lam = 1, eps = 1e-2; the positive solution is symmetric, u = v
  system_eps_l2: same with lam = 2
"""
import numpy as np
from scipy.sparse import diags
from scipy.sparse.linalg import spsolve


def newton_fd(f, df, n, init):
    h = 1.0 / n
    x = np.linspace(0.0, 1.0, n + 1)
    u = init(x)[1:-1].copy()
    lap = diags([-np.ones(n - 2), 2 * np.ones(n - 1), -np.ones(n - 2)], [-1, 0, 1]) / h**2
    for _ in range(100):
        res = lap @ u - f(u)
        if np.max(np.abs(res)) < 1e-12:
            break
        jac = lap - diags(df(u))
        du = spsolve(jac.tocsc(), -res)
        step = 1.0
        while step > 1e-8:
            trial = u + step * du
            if np.all(trial > 0) and np.max(np.abs(lap @ trial - f(trial))) < np.max(np.abs(res)):
                break
            step *= 0.5
        u = u + step * du
    full = np.zeros(n + 1)
    full[1:-1] = u
    return x, full


def sample(x, u, points):
    return [float(np.interp(p, x, u)) for p in points]


if __name__ == "__main__":
    pts = [0.125, 0.25, 0.5]
    print("# dense-grid finite-difference oracle values u(x) at x = 0.125 0.25 0.5")
    x, u = newton_fd(lambda u: 1.0 / (u + 1.0), lambda u: -1.0 / (u + 1.0) ** 2, 2000,
                     lambda x: x * (1 - x) / 2)
    print("scalar_inv", *(f"{v:.17g}" for v in sample(x, u, pts)))
    eps = 1e-2
    for tag, lam in (("system_eps", 1.0), ("system_eps_l2", 2.0)):
        f = lambda u, lam=lam: lam * np.sqrt(u) / np.sqrt(u + eps)
        df = lambda u, lam=lam: lam * 0.5 * eps / (np.sqrt(u) * (u + eps) ** 1.5)
        x, u = newton_fd(f, df, 2048, lambda x, lam=lam: lam * x * (1 - x) / 2)
        print(tag, *(f"{v:.17g}" for v in sample(x, u, pts)))
