# Independent evaluations for kernel-module tests (mpmath / scipy).
from mpmath import mp, mpf, quad, cos, pi, gamma, sqrt, log, inf, sin
import numpy as np
mp.dps = 30

def I(s, th):
    s = mpf(s); th = mpf(th)
    return quad(lambda t: (1 + t*t - 2*t*cos(th))**(-(2+s)/2), [0, 1, 2, inf])

for s in ['0.3']:
    print("I(0.3,pi/2) =", mp.nstr(I(s, pi/2), 20), "closed", mp.nstr(sqrt(pi)*gamma((1+mpf(s))/2)/(2*gamma((2+mpf(s))/2)), 20))
print("I(0.3,1.0)  =", mp.nstr(I('0.3', 1), 20))
print("I(0.1,0.2)  =", mp.nstr(I('0.1', '0.2'), 20))
print("I(0.45,5.5) =", mp.nstr(I('0.45', '5.5'), 20))

# sweep of I(s,th)(1-cos th)^{1+s}
best = None
for s in [0.01, 0.1, 0.25, 0.4, 0.49]:
    for th in [0.05, 0.1, 0.3, 1.0, 2.0, pi]:
        v = I(s, th)*(1-cos(th))**(1+s)
        if best is None or v < best[0]:
            best = (v, s, th)
print("sweep min (coarse):", best)

for s in [0.01, 0.2, 0.49]:
    for th in [0.05, 0.06, 0.08]:
        print("s", s, "th", th, mp.nstr(I(s, th)*(1-cos(th))**(1+s), 15))
print("corner min (s=0.49, th=0.05):", mp.nstr(I('0.49', '0.05')*(1-cos(mpf('0.05')))**(mpf('1.49')), 20))
