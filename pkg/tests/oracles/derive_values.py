"""Independent derivations of the frozen constants used in the test suite.

Run with ``python tests/oracles/derive_values.py``. Uses mpmath at 50
digits and does not import the package under test.
"""

import mpmath as mp

mp.mp.dps = 50

D = mp.mpf(2870)
GAMMA = mp.mpf("2.87")
AXES = [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]


def resonances(mag, direction):
    norm = mp.sqrt(sum(mp.mpf(x) ** 2 for x in direction))
    u = [mp.mpf(x) / norm for x in direction]
    out = []
    for ax in AXES:
        cos = abs(sum(a * b for a, b in zip(ax, u))) / mp.sqrt(3)
        out += [D - GAMMA * mag * cos, D + GAMMA * mag * cos]
    return sorted(out)


def lorentz(nu, c, w):
    return (2 / (mp.pi * w)) / (1 + 4 * (nu - c) ** 2 / w**2)


if __name__ == "__main__":
    print("L(center, w=10) =", mp.nstr(lorentz(0, 0, 10), 20))
    print("aligned 100 G:", [mp.nstr(x, 20) for x in resonances(100, [1, 1, 1])])
    print("direction (1,2,3) at 100 G:", [mp.nstr(x, 20) for x in resonances(100, [1, 2, 3])])
    print("direction (0.3,-0.5,0.8) at 50 G:", [mp.nstr(x, 20) for x in resonances(50, [0.3, -0.5, 0.8])])
    # three-peak sum at one tone: peaks at 0, 7, -12 with widths 10, 15, 5 and areas 1, 2, 3
    print("sum at 2.5:", mp.nstr(lorentz(2.5, 0, 10) * 1 + lorentz(2.5, 7, 15) * 2 + lorentz(2.5, -12, 5) * 3, 20))
