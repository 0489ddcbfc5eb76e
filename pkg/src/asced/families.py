"""Parity-check matrices of a few classical binary codes used in tests and demos."""

from __future__ import annotations

import numpy as np

from .gf2 import BitMatrix

# primitive polynomials, bit i = coefficient of x^i
_PRIMITIVE = {3: 0b1011, 4: 0b10011, 5: 0b100101, 6: 0b1000011, 7: 0b10001001, 8: 0b100011101}


def hamming_pcm(r: int = 3) -> BitMatrix:
    """Hamming code of length ``2^r - 1``: column ``j`` is the binary expansion of ``j + 1``.

    For ``r = 3`` this is ``[[1010101], [0110011], [0001111]]``.
    """
    n = (1 << r) - 1
    cols = np.arange(1, n + 1)
    dense = np.array([(cols >> i) & 1 for i in range(r)], dtype=np.uint8)
    return BitMatrix.from_dense(dense)


def _gf_tables(m: int) -> tuple[np.ndarray, np.ndarray]:
    prim = _PRIMITIVE[m]
    size = 1 << m
    exp = np.zeros(2 * size, dtype=np.int64)
    log = np.zeros(size, dtype=np.int64)
    x = 1
    for i in range(size - 1):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & size:
            x ^= prim
    exp[size - 1 : 2 * (size - 1)] = exp[: size - 1]
    return exp, log


def _poly_mul_gf2(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def _poly_divmod_gf2(a: int, b: int) -> tuple[int, int]:
    q = 0
    db = b.bit_length()
    while a.bit_length() >= db:
        shift = a.bit_length() - db
        q |= 1 << shift
        a ^= b << shift
    return q, a


def _minimal_polynomial(i: int, m: int, exp: np.ndarray, log: np.ndarray) -> int:
    n = (1 << m) - 1
    coset = []
    j = i % n
    while j not in coset:
        coset.append(j)
        j = (2 * j) % n
    # product of (x - alpha^j) with GF(2^m) coefficients, low degree first
    poly = [1]
    for j in coset:
        root = int(exp[j])
        nxt = [0] * (len(poly) + 1)
        for d, c in enumerate(poly):
            nxt[d + 1] ^= c
            if c:
                nxt[d] ^= int(exp[(log[c] + log[root]) % n])
        poly = nxt
    if any(c not in (0, 1) for c in poly):
        raise ArithmeticError("minimal polynomial has non-binary coefficients")
    return sum(c << d for d, c in enumerate(poly))


def bch_generator_polynomial(m: int, t: int) -> int:
    """Generator polynomial of the narrow-sense primitive BCH code of length ``2^m - 1``."""
    exp, log = _gf_tables(m)
    g = 1
    seen = set()
    for i in range(1, 2 * t, 2):
        mp = _minimal_polynomial(i, m, exp, log)
        if mp in seen:
            continue
        seen.add(mp)
        g = _poly_mul_gf2(g, mp)
    return g


def cyclic_pcm(n: int, g: int) -> BitMatrix:
    """``(n-k) x n`` parity-check matrix built from shifts of the reciprocal check polynomial."""
    h, rem = _poly_divmod_gf2((1 << n) | 1, g)
    if rem:
        raise ValueError("g(x) does not divide x^n - 1")
    k = h.bit_length() - 1
    # row i has h_{k-j} in column i + j
    recip = int(format(h, f"0{k + 1}b")[::-1], 2)
    rows = tuple(recip << i for i in range(n - k))
    return BitMatrix(n, rows)


def cyclic_generator(n: int, g: int) -> BitMatrix:
    k = n - (g.bit_length() - 1)
    return BitMatrix(n, tuple(g << i for i in range(k)))


def bch_pcm(m: int, t: int) -> BitMatrix:
    """Cyclic PCM of the primitive narrow-sense BCH code with designed distance ``2t + 1``.

    ``bch_pcm(4, 2)`` is BCH(15,7) and ``bch_pcm(6, 6)`` is BCH(63,30).
    """
    n = (1 << m) - 1
    return cyclic_pcm(n, bch_generator_polynomial(m, t))
