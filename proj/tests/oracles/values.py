"""Reference values hard-coded in the unit tests, recomputed with sympy/mpmath.

Run: python3 tests/oracles/values.py   (needs sympy, mpmath)
"""
from sympy import Abs, Rational, binomial, diff, expand, factorial, nsimplify, rf, simplify, symbols, integrate
import mpmath as mp

x, y, z = symbols("x y z")


def f4_trunc(a, b, c, d, X, Y, N):
    return sum(rf(a, m + n) * rf(b, m + n) / (rf(c, m) * rf(d, n) * factorial(m) * factorial(n)) * X**m * Y**n
               for m in range(N + 1) for n in range(N + 1 - m))


# M |P|^-g (1 + (1-g) S F4(1, 2-g; 2, 1-g; X, Y)); terminates at degree g-2 for integer g >= 2
def closed(g, M, P, S, X, Y):
    return M * Abs(P) ** (-g) * (1 + (1 - g) * S * f4_trunc(1, 2 - g, 2, 1 - g, X, Y, g - 2))


def ellipse_laurent(k, lam):
    # finite double sum, seed y^(-2k)
    def term(i, s):
        p = 1
        for j in range(1, s + 1):
            p *= j - (k - i)
        return binomial(s + i - 1, i) * p / (lam ** (s + i) * factorial(s)) * x ** (2 * s) * y ** (-2 * k + 2 * i)
    return sum((-1) ** i * term(i, s) for i in range(0, k - 1) for s in range(1, k - i)) + y ** (-2 * k)


def eq1(V, lam):
    return expand(lam * diff(V, x, y) + 3 * (y * diff(V, x) - x * diff(V, y)) + (y**2 - x**2) * diff(V, x, y)
                  + x * y * (diff(V, x, 2) - diff(V, y, 2)))


print("ellipse k=3 lambda=3/2:", expand(ellipse_laurent(3, Rational(3, 2))))

lam = Rational(3, 2)
pt2 = {x: Rational(1, 3), y: Rational(-2, 5)}
pt3 = {x: Rational(1, 2), y: Rational(2, 3), z: Rational(-3, 4)}
for g in (2, 3, 4):
    X, Y = x**2 / lam, -(y**2) / lam
    print("ellipse", g, closed(g, 1, Y, X, X, Y).subs(pt2))
a, b, c = 5, 3, 2
for g in (2, 3, 4):
    X = c * (a - c) * y**2 / (b * (b - a) * z**2)
    Y = c * (c - b) * x**2 / (a * (b - a) * z**2)
    print("jacobi 5,3,2", g, closed(g, z**-2, Y, X, X, Y).subs(pt3))
A, B, C, K = 3, 2, 1, -1
for g in (2, 3, 4):
    X = x**2 * Rational(B - C, C - A) / y**2
    Y = K * z**2 * Rational(A - B, C - A) / y**2
    print("curved 3,2,1 K=-1", g, closed(g, y**-2, Y, X, X, Y).subs(pt3))
A, B, C = 3, 3, 1
for g in (2, 3, 4):
    S = -(x**2) / Rational(C - A) + y**2 / Rational(B - C)
    Zh = z**2 / Rational(C - A)
    print("symmetric 3,3,1", g, closed(g, 1, Zh, S, S, Zh).subs(pt3))

mp.mp.dps = 30


def f4_num(a, b, c, d, X, Y):
    return mp.nsum(lambda m, n: mp.rf(a, m + n) * mp.rf(b, m + n) / (mp.rf(c, m) * mp.rf(d, n) * mp.factorial(m) * mp.factorial(n))
                   * mp.mpf(X) ** m * mp.mpf(Y) ** n, [0, mp.inf], [0, mp.inf])


print("F4(1,-0.7;2,-1.7;0.04,-0.09)", f4_num(1, "-0.7", 2, "-1.7", "0.04", "-0.09"))
print("F4(.5,1.5;2.5,1.25;.1,.15)", f4_num("0.5", "1.5", "2.5", "1.25", "0.1", "0.15"))
print("2F1(.5,1.5;2.5;.3)", mp.hyp2f1("0.5", "1.5", "2.5", "0.3"))
print("F4(1,-2;2,3;1/5,1/7)", nsimplify(f4_trunc(1, -2, 2, 3, Rational(1, 5), Rational(1, 7), 2)))
print("eq1(x^4)", eq1(x**4, 1), "  eq1(x^2 y^-4, lambda=2)", eq1(x**2 * y**-4, 2))

# k1 antiderivative for V = (1 - x^2)/y^4 on A=3, B=2
A, B = 3, 2
V = (1 - x**2) / y**4
gx = 2 * ((Rational(1, A) - y**2 / (A * B)) * diff(V, x) + x * y / (A * B) * diff(V, y))
gy = 2 * (x * y / (A * B) * diff(V, x) + (Rational(1, B) - x**2 / (A * B)) * diff(V, y))
k = integrate(expand(gx), x)
k = k + integrate(simplify(expand(gy - diff(k, y))), y)
print("curl", simplify(diff(gx, y) - diff(gy, x)), " k1 =", expand(k))
