# P(sup_[0,T] X > u) for OU r(s)=exp(-s) and heavy horizons:
# Pareto(0.5) tail min(1, t^-0.5); log-Pareto tail min(1, 1/ln t); cap irrelevant (S(cap)~0).
# E S(T) = S(t0) + int_{t0}^inf S'(t) tail(t) dt with S from the backward equation.
import sys
import numpy as np
from scipy.linalg import solve_banded
from scipy.stats import norm
from mpmath import mpf, erfc, sqrt, gamma
def m_scale(u):
    return float(1/(mpf(u)**2*erfc(mpf(u)/sqrt(2))/2))
def run(u, tails, N, dt, L=9.0):
    m = m_scale(u); tend = 45*m
    x = np.linspace(-L, u, N+1); h = x[1]-x[0]; xi = x[1:-1]; n = len(xi)
    lo = 1/h**2 + xi/(2*h); di = -2/h**2*np.ones(n); up = 1/h**2 - xi/(2*h)
    def band(theta, d):
        ab = np.zeros((3,n)); ab[0,1:] = -theta*d*up[:-1]; ab[1,:] = 1-theta*d*di; ab[2,:-1] = -theta*d*lo[1:]
        return ab
    def Ap(p):
        return di*p + np.r_[0, lo[1:]*p[:-1]] + np.r_[up[:-1]*p[1:], 0]
    w = norm.pdf(xi)*h
    p = np.ones(n); t = 0.0
    S_prev = float(np.sum(w*p))
    acc = {k: 0.0 for k in tails}; started = {k: False for k in tails}
    ab_e = band(1.0, dt/2); ab_cn = band(0.5, dt)
    k = 0
    while t < tend:
        if k < 4:
            rhs = p.copy(); rhs[0] += dt/2*lo[0]; p = solve_banded((1,1), ab_e, rhs); t += dt/2
        else:
            rhs = p + 0.5*dt*Ap(p); rhs[0] += dt*lo[0]; p = solve_banded((1,1), ab_cn, rhs); t += dt
        k += 1
        S = float(np.sum(w*p))
        for name, (t0, tail) in tails.items():
            if t >= t0:
                if not started[name]:
                    acc[name] = S; started[name] = True
                else:
                    acc[name] += (S - S_prev)*tail(t - 0.5*(dt if k > 4 else dt/2))
        S_prev = S
    return m, {k: 1 - v for k, v in acc.items()}
tails = {"pareto0.5": (1.0, lambda t: t**-0.5), "logpareto": (np.e, lambda t: 1/np.log(t))}
N = int(sys.argv[1]); dt = float(sys.argv[2])
for u in [2.5, 3.0]:
    m, r = run(u, tails, N, dt)
    print(u, m, {k: round(v, 6) for k, v in r.items()}, "gamma-scale form", float(gamma(0.5))/m**0.5, "log scale form", 1/np.log(m))
