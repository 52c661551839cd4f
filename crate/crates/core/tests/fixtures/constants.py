"""Reference values for the closed-form constants at 50 significant digits.

Regenerate with: python3 constants.py > constants.json
"""
import json
from mpmath import mp, mpf, sqrt, log, exp, e, pi

mp.dps = 50

CASES = [
    # r, mu, a1, a3, a4, c_abs
    (3, 1, 2, 1, 1, 1),
    (mpf("2.5"), mpf("1.5"), 3, mpf("0.8"), 1, 1),
    (mpf("2.8"), 2, 4, mpf("1.2"), 1, mpf("1.5")),
    (4, mpf("1.2"), mpf("1.5"), 1, 1, 2),
    (mpf("2.2"), 1, 2, mpf("0.9"), 1, 1),
    (3, 3, mpf("0.01"), 2, 1, 1),
]
DELTAS = [1, 5, 100]


def case(*args):
    # Evaluate at the binary64 inputs the Rust side sees.
    r, mu, a1, a3, a4, c_abs = (mpf(float(a)) for a in args)
    r0 = min(mpf(3), mpf(r))
    q = (a3**2 / (32 * mu**2)) ** (r0 / (r0 - 2))
    b1 = a3**4 / (32 * mu**2) * q
    b2 = a3**2 / (8 * mu**2) * q
    delta0 = max(2 / b2 * log(6 * a1 / b1), 2 / b2 * log(3))
    rho = min(mpf(1) / 4, b1 / (5 * a1))
    gamma = b2 / (4 * log(6 * e / (rho * b2)))
    c3 = c_abs * (sqrt(pi) / rho + mu**r0 / (rho**r0 * a1 ** (r0 - 2)))
    k = c3 * e**2
    c1 = 2 / (r0 - 2) * log(3 * a1 * k)
    ln_c2 = log(gamma + a4 - 1) - 2 * log(a1) - 2 / (r0 - 2) * log(k)
    t = {str(d): 1 / k * (1 / (3 * a1 * k)) ** (mpf(1) / d) for d in DELTAS}
    out = dict(b1=b1, b2=b2, delta0=delta0, rho=rho, gamma=gamma, c3=c3,
               c_tilde_1=c1, ln_c_tilde_2=ln_c2)
    out = {k_: float(v) for k_, v in out.items()}
    out["t"] = {d: float(v) for d, v in t.items()}
    inputs = dict(r=float(r), mu=float(mu), a1=float(a1), a3=float(a3), a4=float(a4), c_abs=float(c_abs))
    return {"inputs": inputs, "expected": out}


print(json.dumps([case(*c) for c in CASES], indent=2))
