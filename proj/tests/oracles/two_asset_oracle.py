"""Independent reference values for the two-asset, two-factor example.

Computed with mpmath at 40 digits; the C++ tests freeze the printed numbers.
Run: python3 tests/oracles/two_asset_oracle.py
"""
import itertools

import mpmath as mp

mp.mp.dps = 40


def cdf(x):
    return mp.ncdf(x)


def ppf(p):
    return mp.sqrt(2) * mp.erfinv(2 * mp.mpf(p) - 1)


def grid(n, bound):
    m = 2 ** n
    vals = [mp.mpf(-bound) + mp.mpf(2 * bound) * i / (m - 1) for i in range(m)]
    dens = [mp.exp(-v * v / 2) for v in vals]
    s = sum(dens)
    return vals, [d / s for d in dens]


def pd(p0, rho, alphas, z):
    y = sum(mp.mpf(a) * zi for a, zi in zip(alphas, z))
    return cdf((ppf(p0) - mp.sqrt(rho) * y) / mp.sqrt(1 - mp.mpf(rho)))


def loss_dist(assets, grids):
    out = {}
    for idx in itertools.product(*[range(len(g[0])) for g in grids]):
        pz = mp.mpf(1)
        z = []
        for g, i in zip(grids, idx):
            pz *= g[1][i]
            z.append(g[0][i])
        pds = [pd(a["p0"], a["rho"], a["alphas"], z) for a in assets]
        for b in itertools.product([0, 1], repeat=len(assets)):
            pb = pz
            loss = mp.mpf(0)
            for a, bk, q in zip(assets, b, pds):
                pb *= q if bk else 1 - q
                loss += mp.mpf(a["lgd"]) * bk
            key = mp.nstr(loss, 12)
            out[key] = out.get(key, 0) + pb
    return out


def theta(p):
    return 2 * mp.asin(mp.sqrt(p))


two_asset = [
    dict(lgd="1000.5", p0="0.15", rho="0.1", alphas=["0.35", "0.2"]),
    dict(lgd="2000.5", p0="0.25", rho="0.05", alphas=["0.1", "0.25"]),
]

if __name__ == "__main__":
    print("cdf(1)      ", mp.nstr(cdf(1), 20))
    print("ppf(0.975)  ", mp.nstr(ppf("0.975"), 20))
    v, p = grid(2, 3)
    print("grid(2,3)   ", [mp.nstr(x, 20) for x in p])
    print("pd asset1 z=0", mp.nstr(pd("0.15", "0.1", ["0.35", "0.2"], [0, 0]), 20))
    g = grid(2, 3)
    d = loss_dist(two_asset, [g, g])
    run = mp.mpf(0)
    el = mp.mpf(0)
    for k in sorted(d, key=lambda s: mp.mpf(s)):
        run += d[k]
        el += mp.mpf(k) * d[k]
        print("loss", k, "prob", mp.nstr(d[k], 20), "cdf", mp.nstr(run, 20))
    print("E[L]", mp.nstr(el, 20))
    # endpoint secant of theta over factor 1, factor 2 held at its mid value 0
    a = two_asset[0]
    t_lo = theta(pd(a["p0"], a["rho"], a["alphas"], [-3, 0]))
    t_hi = theta(pd(a["p0"], a["rho"], a["alphas"], [3, 0]))
    print("fit asset1 f1 slope", mp.nstr((t_hi - t_lo) / 3, 20), "offset", mp.nstr(t_lo, 20))
    # integer legacy portfolio {1,2}
    ints = [dict(t, lgd=l) for t, l in zip(two_asset, ["1", "2"])]
    d = loss_dist(ints, [g, g])
    run = mp.mpf(0)
    for k in sorted(d, key=lambda s: mp.mpf(s)):
        run += d[k]
        print("int loss", k, "cdf", mp.nstr(run, 20))
    # exact binomial interval, 30 of 100 at 95%
    def beta_quantile(a, b, q):
        lo, hi = mp.mpf(0), mp.mpf(1)
        for _ in range(200):
            mid = (lo + hi) / 2
            if mp.betainc(a, b, 0, mid, regularized=True) < q:
                lo = mid
            else:
                hi = mid
        return lo
    print("clopper-pearson 30/100", mp.nstr(beta_quantile(30, 71, mp.mpf("0.025")), 20),
          mp.nstr(beta_quantile(31, 70, mp.mpf("0.975")), 20))
