"""Binary digit sums, Stiefel-Hopf parity and minimal measurement numbers.

Everything here is exact integer arithmetic.
"""

from dataclasses import asdict, dataclass, field
from typing import Optional

from .core import InputError, check_field


def alpha(n):
    """Number of ones in the binary expansion of n."""
    if n < 0:
        raise InputError("alpha needs n >= 0")
    return bin(n).count("1")


def binom_is_odd(n, k):
    """C(n, k) is odd iff k and n - k share no binary digit (no carry)."""
    if not 0 <= k <= n:
        raise InputError(f"need 0 <= k <= n, got n={n}, k={k}")
    return (k & (n - k)) == 0


def binom_parity(n, k):
    return "odd" if binom_is_odd(n, k) else "even"


def _check_pqN(p, q, N):
    if p < 1 or q < 1:
        raise InputError("p and q must be positive")
    if N < max(p, q):
        raise InputError(f"N must be at least max(p, q) = {max(p, q)}")


def hopf_form(p, q, N):
    """C(N, k) even for every N - q + 1 <= k <= p - 1."""
    _check_pqN(p, q, N)
    return all(not binom_is_odd(N, k) for k in range(N - q + 1, p))


def column_form(p, q, N):
    """C(n, p - 1) even for every N <= n <= p + q - 2."""
    _check_pqN(p, q, N)
    return all(not binom_is_odd(n, p - 1) for n in range(N, p + q - 1))


def stiefel_hopf_pass(p, q, N):
    """Necessary parity condition for a nonsingular bilinear form of size (p, q, N)."""
    a, b = hopf_form(p, q, N), column_form(p, q, N)
    if a != b:
        raise AssertionError(f"parity forms disagree at {(p, q, N)}")
    return a


def sharp_lower_bound(p, q):
    """Smallest N >= max(p, q) passing the parity test; a lower bound for p#q."""
    if p < 1 or q < 1:
        raise InputError("p and q must be positive")
    N = max(p, q)
    while not stiefel_hopf_pass(p, q, N):
        N += 1
    return N


def _floor_log2(n):
    return n.bit_length() - 1


def _power_plus(d, offset, kmin):
    """True if d = 2^k + offset for some k >= kmin."""
    m = d - offset
    return m > 0 and m & (m - 1) == 0 and _floor_log2(m) >= kmin


def _sum_of_powers(m, count, min_exp):
    """m is a sum of ``count`` distinct powers 2^e with every e >= min_exp."""
    if alpha(m) != count:
        return False
    return (m & ((1 << min_exp) - 1)) == 0


@dataclass
class BoundsReport:
    d: int
    field: str
    lower: Optional[int]
    upper: Optional[int]
    exact: Optional[int] = None
    alpha: int = 0
    epsilon_alpha: Optional[int] = None
    delta: Optional[int] = None
    provenance: dict = field(default_factory=dict)

    @property
    def certified_minimum(self):
        """Largest N known to be necessary for the phase retrieval property."""
        if self.exact is not None:
            return self.exact
        return self.lower

    def to_dict(self):
        return asdict(self)


def m_real_bounds(d):
    if d < 2:
        raise InputError("bounds are defined for d >= 2")
    a = alpha(d - 1)
    prov = {}
    upper = 2 * d - 1 if d % 2 else 2 * d - 2
    prov["upper"] = "odd d: 2d-1" if d % 2 else "even d: 2d-2 (symmetric nonsingular form of size (d,d,2d-2))"
    exact = None
    if _power_plus(d, 1, 1):
        exact = 2 * d - 1
        prov["exact"] = "d = 2^k + 1, k >= 1: 2d-1"
    elif _power_plus(d, 2, 1):
        exact = 2 * d - 2
        prov["exact"] = "d = 2^k + 2, k >= 1: 2d-2"
    lower = d
    prov["lower"] = "floor: Jacobian rank d needs N >= d"
    if d >= 5:
        if d % 2:
            formula = 2 * d - 6 * _floor_log2(d - 1) + 6
            text = "2d - 6 floor(log2(d-1)) + 6"
        else:
            formula = 2 * d - 6 * _floor_log2(d - 2) + 4
            text = "2d - 6 floor(log2(d-2)) + 4"
        if formula >= d:
            lower = formula
            prov["lower"] = f"d >= 5: {text}"
        else:
            prov["lower"] = f"d >= 5: {text} = {formula} clamped to floor d"
            prov["clamped"] = True
    if exact is not None:
        lower = upper = exact
    return BoundsReport(d, "R", lower, upper, exact, a, None, None, prov)


def _complex_eps_delta(d, a):
    if d % 2 and a % 4 == 3:
        eps = 2
    elif d % 2 and a % 4 == 2:
        eps = 1
    else:
        eps = 0
    return eps, 0 if d % 2 else 1


def m_complex_bounds(d):
    if d < 2:
        raise InputError("bounds are defined for d >= 2")
    a = alpha(d - 1)
    eps, delta = _complex_eps_delta(d, a)
    prov = {}
    if d == 2:
        prov["exact"] = "m_C(2) = 3 (explicit three-matrix ensemble)"
        return BoundsReport(d, "C", 3, 3, 3, a, eps, delta, prov)
    upper = 4 * d - 3 - a - delta
    prov["upper"] = "4d - 3 - alpha - delta (valid for d > 2)"
    lower = None
    if d > 4:
        lower = 4 * d - 2 - 2 * a + eps
        prov["lower"] = "4d - 2 - 2 alpha + eps_alpha (d > 4)"
        if lower == upper:
            prov["coincide"] = True
    else:
        prov["lower"] = "unavailable for d <= 4"
    exact = None
    m = d - 1
    if d > 4:
        if _sum_of_powers(m, 1, 2):
            exact, prov["exact"] = 4 * d - 4, "d = 2^k + 1, k > 1: 4d-4"
        elif _power_plus(d, 2, 2):
            exact, prov["exact"] = 4 * d - 6, "d = 2^k + 2, k > 1: 4d-6"
        elif _sum_of_powers(m, 2, 2):
            exact, prov["exact"] = 4 * d - 5, "d = 2^k + 2^j + 1, k > j > 1: 4d-5"
        elif _sum_of_powers(m, 3, 2):
            exact, prov["exact"] = 4 * d - 6, "d = 2^k + 2^j + 2^l + 1, k > j > l > 1: 4d-6"
    if exact is not None:
        lower = upper = exact
    return BoundsReport(d, "C", lower, upper, exact, a, eps, delta, prov)


def bounds_report(d, field):
    check_field(field)
    return m_real_bounds(d) if field == "R" else m_complex_bounds(d)


def matrix_recovery_feasible(d, r, N, field="C"):
    """Dimension count for recovering rank <= r matrices from N trace samples.

    Returns ``(verdict, caveat)``.  Over C fewer than 2rd - r^2 samples never
    suffice.  Over R the count is only a heuristic (e.g. rank-one 4 x 4 real
    matrices are recoverable from 11 samples), so the caveat flag is set.
    """
    check_field(field)
    if not 1 <= r <= d:
        raise InputError(f"need 1 <= r <= d, got r={r}, d={d}")
    if field == "R":
        return "dimension_ok", True
    return ("impossible" if N < 2 * r * d - r * r else "dimension_ok"), False


def bounds_table(dmax, fields=("R", "C")):
    rows = []
    for d in range(2, dmax + 1):
        for f in fields:
            rep = bounds_report(d, f)
            rows.append(rep)
    return rows
