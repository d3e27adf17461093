"""Real roots of polynomials up to degree three, in closed form."""

import math


def _polish(coeffs, x, steps=4):
    # Newton steps on the original polynomial remove cancellation error
    c3, c2, c1, c0 = coeffs
    for _ in range(steps):
        p = ((c3 * x + c2) * x + c1) * x + c0
        dp = (3 * c3 * x + 2 * c2) * x + c1
        if dp == 0:
            break
        step = p / dp
        x_new = x - step
        p_new = ((c3 * x_new + c2) * x_new + c1) * x_new + c0
        if abs(p_new) >= abs(p):
            break
        x = x_new
    return x


def quadratic_roots(a, b, c):
    """Real roots of ``a x^2 + b x + c`` (``a`` may be zero)."""
    if a == 0:
        if b == 0:
            return []
        return [-c / b]
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    if disc == 0:
        return [-b / (2 * a)]
    # avoid cancellation between -b and sqrt(disc)
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    return sorted([q / a, c / q])


def cubic_roots(c3, c2, c1, c0):
    """Sorted real roots of ``c3 x^3 + c2 x^2 + c1 x + c0``.

    Uses the trigonometric form when there are three real roots and Cardano's
    formula when there is one.  Falls back to the quadratic formula when
    ``c3 == 0``.
    """
    if c3 == 0:
        return quadratic_roots(c2, c1, c0)
    a, b, c = c2 / c3, c1 / c3, c0 / c3
    # depressed cubic t^3 + p t + q with x = t - a/3
    p = b - a * a / 3.0
    q = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    shift = -a / 3.0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    scale = max(1.0, abs(a), abs(b), abs(c))
    if abs(p) <= 1e-14 * scale and abs(q) <= 1e-14 * scale:
        roots = [shift]
    elif disc > 0:
        sq = math.sqrt(disc)
        u = math.copysign(abs(-q / 2.0 + sq) ** (1.0 / 3.0), -q / 2.0 + sq)
        v = math.copysign(abs(-q / 2.0 - sq) ** (1.0 / 3.0), -q / 2.0 - sq)
        roots = [u + v + shift]
    else:
        # three real roots (p < 0)
        r = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * r) if p != 0 else 0.0
        arg = min(1.0, max(-1.0, arg))
        phi = math.acos(arg) / 3.0
        roots = [r * math.cos(phi - 2.0 * math.pi * k / 3.0) + shift for k in range(3)]
    return sorted(_polish((c3, c2, c1, c0), x) for x in roots)
