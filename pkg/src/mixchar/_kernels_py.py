"""Pure-Python versions of the hot arithmetic kernels."""


def val_p_factorial(p, n):
    v = 0
    n //= p
    while n:
        v += n
        n //= p
    return v


def conv_trunc_mod(a, b, n, m):
    """First ``n`` coefficients of the product of ``a`` and ``b`` modulo ``m``."""
    out = [0] * n
    la = len(a)
    lb = len(b)
    for i in range(min(la, n)):
        ai = a[i]
        if ai == 0:
            continue
        for j in range(min(lb, n - i)):
            out[i + j] += ai * b[j]
    return [c % m for c in out]


def forward_differences(values):
    """Newton forward differences: returns [(Delta^k f)(0) for k]."""
    row = list(values)
    out = []
    while row:
        out.append(row[0])
        row = [row[i + 1] - row[i] for i in range(len(row) - 1)]
    return out
