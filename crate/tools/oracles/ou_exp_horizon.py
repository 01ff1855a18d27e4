# P(sup_[0,T] X > u), T ~ Exp(1) independent, stationary OU r(s)=exp(-s):
# q - (q'' - x q') = 1 on (-L,u), q(u)=0; answer 1 - int phi q.
import sys
import numpy as np
from scipy.sparse import diags
from scipy.sparse.linalg import spsolve
from scipy.stats import norm
def p_exceed(u, N, L=10.0):
    x = np.linspace(-L, u, N+1); h = x[1]-x[0]; xi = x[1:-1]
    lo = 1/h**2 + xi/(2*h); up = 1/h**2 - xi/(2*h)
    A = diags([-lo[1:], 1 + 2/h**2*np.ones(len(xi)), -up[:-1]], [-1, 0, 1], format='csc')
    rhs = np.ones(len(xi)); rhs[0] += lo[0]*1.0  # q(-L) ~ 1
    q = spsolve(A, rhs)
    # trapezoid with q(u)=0
    return 1 - np.sum(norm.pdf(xi)*q)*h - norm.cdf(-L)
for N in [20000, 80000]:
    print(N, [f"{p_exceed(u, N):.6e}" for u in (2.5, 3.0, 3.5)])
