import sys
# P(sup_[0,t] X <= u) for stationary OU r(s)=exp(-s): backward equation
# p_t = p_xx - x p_x on (-L, u), p(u,t)=0, p(x,0)=1; answer = int phi(x) p(x,t) dx.
import numpy as np
from scipy.linalg import solve_banded
from scipy.stats import norm
from mpmath import mp, mpf, erfc, sqrt, exp, pi, log
mp.dps = 30
def m_scale(u):
    psi = erfc(mpf(u)/sqrt(2))/2
    return float(1/(mpf(u)**2*psi))
def survival(u, ts, N=int(sys.argv[2]) if len(sys.argv)>2 else 6000, L=9.0, dt=0.005):
    x = np.linspace(-L, u, N+1); h = x[1]-x[0]
    xi = x[1:-1]; n = len(xi)
    # operator A p = p'' - x p'  (central differences), reflecting far left approx via large L
    lo = 1/h**2 + xi/(2*h); di = -2/h**2*np.ones(n); up = 1/h**2 - xi/(2*h)
    p = np.ones(n)
    ab = np.zeros((3,n))
    ab[0,1:] = -0.5*dt*up[:-1]; ab[1,:] = 1-0.5*dt*di; ab[2,:-1] = -0.5*dt*lo[1:]
    w = norm.pdf(xi)*h
    out = {}; t = 0.0; targets = sorted(ts); k = 0
    # rannacher start: few implicit Euler steps
    while k < len(targets):
        steps = int(round((targets[k]-t)/dt))
        for s in range(steps):
            rhs = p + 0.5*dt*(di*p + np.r_[0, lo[1:]*p[:-1]] + np.r_[up[:-1]*p[1:], 0])
            rhs[0] += 0.5*dt*lo[0]*1.0*2  # left boundary p(-L)=1 held (both halves)
            p = solve_banded((1,1), ab, rhs)
        t += steps*dt
        out[targets[k]] = float(np.sum(w*p))
        k += 1
    return out

for u in [2.5, 3.0, 3.5]:
    m = m_scale(u)
    xs = [0.5, 1.0, 2.0]
    s = survival(u, [x*m for x in xs], dt=float(sys.argv[1]) if len(sys.argv)>1 else 0.01)
    devs = [s[x*m]-np.exp(-x) for x in xs]
    print(u, round(m,4), [round(s[x*m],5) for x in xs], "dev", [round(d,5) for d in devs], "max", round(max(abs(d) for d in devs),5))
