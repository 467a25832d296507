#!/usr/bin/env python3
"""Shooting oracle for the first Dirichlet eigenvalue of the 1D r-Laplacian.

Solves -(|u'|^{r-2} u')' = lam |u|^{r-2} u on (0, L), u(0) = u(L) = 0 by
integrating from x = 0 with u(0) = 0, u'(0) = 1 and bisecting on lam until
the first zero of u lands at x = L. The closed form (r-1) (pi_r / L)^r with
pi_r = 2 pi / (r sin(pi / r)) is printed alongside as a cross-check only.

Usage: plap_eigen_shooting.py > tests/fixtures/plap_eigen_oracle.txt
"""
import math

from scipy.integrate import solve_ivp


def first_zero(r, lam, length):
    # state: u, w = |u'|^{r-2} u'
    def rhs(_, y):
        u, w = y
        du = math.copysign(abs(w) ** (1.0 / (r - 1.0)), w)
        return [du, -lam * math.copysign(abs(u) ** (r - 1.0), u)]

    def hit_zero(x, y):
        return y[0] if x > 1e-9 else 1.0

    hit_zero.terminal = True
    hit_zero.direction = -1
    sol = solve_ivp(rhs, (0.0, 4.0 * length), [0.0, 1.0], events=hit_zero,
                    rtol=1e-12, atol=1e-14, max_step=length / 2000.0)
    if sol.t_events[0].size == 0:
        return math.inf
    return sol.t_events[0][0]


def eigenvalue(r, length=1.0):
    lo, hi = 1e-3, 1e4
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if first_zero(r, mid, length) > length:
            lo = mid
        else:
            hi = mid
        if hi / lo - 1.0 < 1e-13:
            break
    return math.sqrt(lo * hi)


def closed_form(r, length=1.0):
    pi_r = 2.0 * math.pi / (r * math.sin(math.pi / r))
    return (r - 1.0) * (pi_r / length) ** r


if __name__ == "__main__":
    print("# first Dirichlet eigenvalue of the 1D r-Laplacian on (0, L), shooting oracle")
    print("# columns: r L lambda_shooting lambda_closed_form")
    for r in (1.5, 2.0, 3.0):
        for length in (1.0, 2.0):
            print(f"{r:.17g} {length:.17g} {eigenvalue(r, length):.17g} {closed_form(r, length):.17g}")
