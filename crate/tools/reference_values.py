"""High-precision reference values frozen into the unit tests.

Run with `python3 tools/reference_values.py` (needs mpmath).
"""
from mpmath import mp, mpf, pi, sqrt

mp.dps = 30

lam, eta, eps = mpf(1), mpf("0.95"), mpf("0.99")
kappa = (1 - eta) * eps


def thermal(n, mu):
    return (1 / (1 + mu)) * (mu / (1 + mu)) ** n


def branches(l):
    p1 = l * kappa / (1 + l * kappa)
    return p1, 1 - p1, eta * l / (1 + kappa * l)


def rejected_onoff_fi(l):
    return eps * eta / (l * (1 + eps * l) ** 2 * (1 + kappa * l))


def click_fi(l):
    return kappa / (l * (1 + l * kappa) ** 2)


p1, p0, lam_rej = branches(lam)
rows = {
    "success probability": p1,
    "rejected mean": lam_rej,
    "accepted pmf(0)": (thermal(0, eta * lam) - p0 * thermal(0, lam_rej)) / p1,
    "accepted mean": (eta * lam - p0 * lam_rej) / p1,
    "rejected pmf(0)": 1 / (1 + lam_rej),
    "rejected QFI": eta / (1 + kappa * lam) ** 2 / (lam * (1 + eta * lam + kappa * lam)),
    "click FI (1)": click_fi(lam),
    "click FI (0.1)": click_fi(mpf("0.1")),
    "rejected on-off FI (1)": rejected_onoff_fi(lam),
    "rejected on-off FI (0.1)": rejected_onoff_fi(mpf("0.1")),
    "direct rate (0.1)": 1 / (mpf("0.1") * mpf("1.1")) / 11,
    "homodyne subtracted pdf(0)": 6 / (sqrt(pi) * 3 ** mpf("2.5")),
    "thermal on-off FI (1)": eps / (lam * (1 + eps * lam) ** 2),
}
for name, value in rows.items():
    print(f"{name:28s} {mp.nstr(value, 20)}")
