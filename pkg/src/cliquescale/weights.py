"""Weight distribution with tail P(H > h) = h^(1-alpha) l(h) on [1, inf).

alpha > 2 keeps the mean finite.  When l(1) < 1 the remaining mass 1 - l(1)
sits as an atom at h = 1, which is the only point mass the model admits.
All moment-type integrals are done by parts,

    int_a^b h^beta dF = Fbar(a) a^beta - Fbar(b) b^beta
                        + beta int_a^b h^(beta-1) Fbar(h) dh,

so only the tail itself is ever evaluated, never a density of l's derivative
alone; improper upper limits are truncated where a certified power bound on
the remainder drops below tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DivergenceError, ParameterError, UnsupportedSamplingError
from .quadrature import adaptive_quad, log_panel_integral
from .slowvary import SlowlyVaryingSpec, const, make_l

_VALIDITY_GRID = np.geomspace(1.0, 1e12, 1000)


class TailDistribution:
    """Immutable weight law (alpha, l); safe to share across threads.

    ``formal=True`` skips tail-validity checks and disables sampling and
    probability accessors: the object then only serves as the literal
    differential d(1 - h^(1-alpha) l(h)) inside moment integrals.
    """

    def __init__(self, alpha: float, l: SlowlyVaryingSpec | None = None,
                 formal: bool = False):
        if not alpha > 2.0:
            raise ParameterError(
                f"power-law exponent must satisfy alpha > 2 (mean weight "
                f"diverges otherwise), got {alpha}")
        self.alpha = float(alpha)
        self.l = l if l is not None else const(1.0)
        if self.l.formal_only and not formal:
            raise ParameterError(
                f"l={self.l.name} is only usable in formal mode; pass formal=True")
        self.formal = bool(formal)
        self._mu: Optional[float] = None
        self._mu_override: Optional[float] = None
        if not self.formal:
            self._check_valid_tail()

    # -- construction helpers ------------------------------------------------

    def _check_valid_tail(self):
        vals = self._tail_raw(_VALIDITY_GRID)
        lv = self.l(_VALIDITY_GRID)
        if np.any(lv <= 0):
            raise ParameterError(f"l={self.l.label} is not positive on [1, 1e12]")
        if vals[0] > 1.0 + 1e-12:
            raise ParameterError(
                f"tail at 1 is {vals[0]:.6g} > 1; (alpha={self.alpha}, "
                f"l={self.l.label}) is not a sub-probability")
        if np.any(np.diff(vals) > 1e-12 * vals[:-1]):
            raise ParameterError(
                f"h^(1-alpha) l(h) is not nonincreasing for alpha={self.alpha}, "
                f"l={self.l.label}; use formal mode if this is intentional")

    def with_mean_override(self, mu: float) -> "TailDistribution":
        """Copy whose mu (the edge-probability scale) is pinned to ``mu``.

        The weight law itself is unchanged; only min{h_i h_j / (mu n), 1}
        sees the override.
        """
        if not mu >= 1.0:
            raise ParameterError(f"mean-weight override must be >= 1, got {mu}")
        other = object.__new__(TailDistribution)
        other.alpha = self.alpha
        other.l = self.l
        other.formal = self.formal
        other._mu = self._mu
        other._mu_override = float(mu)
        return other

    # -- basic accessors -----------------------------------------------------

    def _tail_raw(self, h):
        h = np.asarray(h, dtype=float)
        return h ** (1.0 - self.alpha) * self.l(h)

    def tail(self, h):
        """P(H > h) for h >= 1, clamped to [0, 1]."""
        h = np.asarray(h, dtype=float)
        if np.any(h < 1.0):
            raise ParameterError("tail is defined on h >= 1 only")
        out = np.clip(self._tail_raw(h), 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def density(self, h):
        """-d/dh of the tail: h^-alpha [(alpha-1) l(h) - h l'(h)]."""
        h = np.asarray(h, dtype=float)
        return h ** (-self.alpha) * ((self.alpha - 1.0) * self.l(h)
                                     - h * self.l.deriv(h))

    @property
    def atom_at_one(self) -> float:
        if self.formal:
            return 0.0
        return float(max(0.0, 1.0 - self._tail_raw(np.array(1.0))))

    @property
    def mu(self) -> float:
        """Mean weight E[H] = 1 + int_1^inf Fbar(h) dh (or the override)."""
        if self._mu_override is not None:
            return self._mu_override
        if self._mu is None:
            self._mu = self._compute_mean()
        return self._mu

    def cutoff(self, n: int) -> float:
        """Weight threshold sqrt(mu n) above which same-side pairs are certain."""
        return math.sqrt(self.mu * n)

    def _truncation_point(self, q: float, floor: float = 1e4) -> float:
        """T such that int_T^inf h^q l(h) dh <= l(T) T^(q+1)/(-q-1-eps) is
        negligible; q < -1 is the caller's responsibility."""
        T = floor
        while T < 1e300:
            eps = self.l.log_slope_bound(T)
            if -q - 1.0 - eps > 0:
                bound = float(self.l(T)) * T ** (q + 1.0) / (-q - 1.0 - eps)
                if bound <= 1e-12:
                    return T
            T *= 100.0
        raise ParameterError(f"no workable truncation point for exponent {q}")

    def _compute_mean(self) -> float:
        # total >= 1, so an absolute remainder below 1e-12 is 1e-12 relative
        T = self._truncation_point(1.0 - self.alpha)
        res = adaptive_quad(self._tail_raw, 1.0, T, rtol=1e-10)
        return 1.0 + res.value

    # -- moment integrals ------------------------------------------------------

    def moment_integral(self, beta: float, a: float, b: float,
                        include_atom: bool = True, rtol: float = 1e-8) -> float:
        """int_a^b h^beta dF(h), the atom at 1 included when a == 1.

        b may be inf when beta < alpha - 1; beyond a certified truncation
        point the remainder is bounded analytically and dropped.
        """
        if not 1.0 <= a <= b:
            raise ParameterError(f"need 1 <= a <= b, got a={a}, b={b}")
        improper = math.isinf(b)
        if improper and beta >= self.alpha - 1.0 - 1e-12:
            raise DivergenceError(
                f"int h^{beta} dF diverges at infinity for alpha={self.alpha} "
                f"(requires beta < alpha - 1)")
        if a == 1.0 and include_atom and not self.formal:
            left = 1.0
        else:
            left = float(self._tail_raw(np.array(a)))
        if improper:
            b = self._truncation_point(beta - self.alpha, floor=max(10.0 * a, 1e4))
        right = float(self._tail_raw(np.array(b)))
        if a == b:
            return left * a ** beta - right * b ** beta
        if beta == 0.0:
            core = 0.0
        else:
            res = adaptive_quad(
                lambda h: h ** (beta - 1.0) * self._tail_raw(h), a, b, rtol=rtol)
            core = beta * res.value
        return left * a ** beta - right * b ** beta + core

    def moment_batch(self, beta: float, a, b, include_atom: bool = False) -> np.ndarray:
        """Vectorized int_a^b h^beta dF over arrays of finite intervals.

        Hot path for the clique-probability quadratures; uses the catalogue
        closed form when one exists, fixed log-panel Gauss rules otherwise.
        Intervals with b <= a contribute 0 (plus the atom when requested).
        """
        a = np.atleast_1d(np.asarray(a, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        a, b = np.broadcast_arrays(a, b)
        if self.l.closed_moment is not None and not self.formal:
            out = np.where(b > a,
                           self.l.closed_moment(self.alpha, beta, a, np.maximum(b, a)),
                           0.0)
        else:
            lo = self._tail_raw(a) * a ** beta
            hi = self._tail_raw(b) * b ** beta
            core = log_panel_integral(
                lambda h: h ** (beta - 1.0) * self._tail_raw(h), a, b) * beta
            out = np.where(b > a, lo - hi + core, 0.0)
        if include_atom and not self.formal:
            out = out + np.where(a == 1.0, self.atom_at_one, 0.0)
        return out

    # -- resonant moment functional -------------------------------------------

    def q_function(self, x: float, rtol: float = 1e-10) -> float:
        """Q(x) = int over (1, x] of h^(alpha-1) dF(h), for integer alpha >= 3.

        By parts this is l(1) - l(x) + (alpha-1) int_1^x l(h)/h dh, which is
        also the formal-mode value; the open left end keeps Q(1) = 0 even
        when an atom sits at 1.
        """
        k = round(self.alpha)
        if abs(self.alpha - k) > 1e-9 or k < 3:
            raise ParameterError(
                f"the resonant moment functional needs integer alpha >= 3, "
                f"got alpha={self.alpha}")
        if x < 1.0:
            raise ParameterError(f"Q is defined for x >= 1, got {x}")
        if x == 1.0:
            return 0.0
        res = adaptive_quad(lambda h: self.l(h) / h, 1.0, x, rtol=rtol)
        l1 = float(self.l(np.array(1.0)))
        lx = float(self.l(np.array(x)))
        return l1 - lx + (self.alpha - 1.0) * res.value

    # -- sampling ---------------------------------------------------------------

    def inverse_tail(self, u):
        """Smallest h >= 1 with Fbar(h) <= u; the inverse-transform sampler.

        Closed form for constant l; monotone log-space bisection to 1e-12
        relative otherwise.  u >= Fbar(1) lands on the atom at 1.
        """
        if self.formal:
            raise UnsupportedSamplingError(
                "formal-mode distributions have no probability law to sample")
        u_in = np.asarray(u, dtype=float)
        scalar = u_in.ndim == 0
        u_arr = np.atleast_1d(u_in)
        if np.any(u_arr <= 0.0) or np.any(u_arr > 1.0):
            raise ParameterError("uniform inputs must lie in (0, 1]")
        f1 = float(self._tail_raw(np.array(1.0)))
        out = np.ones_like(u_arr)
        live = u_arr < f1
        if np.any(live):
            ul = u_arr[live]
            if self.l.name in ("one", "const"):
                c = self.l.params[0] if self.l.params else 1.0
                out[live] = (ul / c) ** (1.0 / (1.0 - self.alpha))
            else:
                lo = np.ones_like(ul)
                hi = np.full_like(ul, 2.0)
                for _ in range(80):
                    grow = self._tail_raw(hi) > ul
                    if not np.any(grow):
                        break
                    hi[grow] = hi[grow] ** 2
                for _ in range(120):
                    mid = np.sqrt(lo * hi)
                    below = self._tail_raw(mid) > ul
                    lo = np.where(below, mid, lo)
                    hi = np.where(below, hi, mid)
                    if np.max(hi / lo) - 1.0 < 1e-13:
                        break
                out[live] = np.sqrt(lo * hi)
        return float(out[0]) if scalar else out

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """size i.i.d. weights from an explicit caller-owned generator."""
        u = 1.0 - rng.random(size)      # uniform on (0, 1]
        return np.atleast_1d(self.inverse_tail(u))

    # -- serialization ------------------------------------------------------------

    def to_config(self) -> str:
        lines = [f"alpha = {self.alpha!r}", f"l = {self.l.name}"]
        if self.l.params:
            lines.append("l_params = " + ",".join(repr(p) for p in self.l.params))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_config(cls, text: str) -> "TailDistribution":
        """Parse the key-value document; mu and validity are always
        recomputed, never read from the file."""
        fields = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"bad distribution config line: {raw!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            fields[key.lower()] = val
        if "alpha" not in fields or "l" not in fields:
            raise ParameterError("distribution config needs 'alpha' and 'l'")
        params = tuple(float(p) for p in fields.get("l_params", "").split(",") if p)
        l = make_l(fields["l"], params)
        return cls(float(fields["alpha"]), l, formal=l.formal_only)

    def __repr__(self):
        tag = ", formal" if self.formal else ""
        return f"TailDistribution(alpha={self.alpha}, l={self.l.label}{tag})"


@dataclass
class QFunctional:
    """Memoized Q(x) for one integer-alpha distribution."""

    dist: TailDistribution
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        k = round(self.dist.alpha)
        if abs(self.dist.alpha - k) > 1e-9 or k < 3:
            raise ParameterError("QFunctional needs integer alpha >= 3")
        self.alpha = k

    def __call__(self, x: float) -> float:
        if x not in self.values:
            self.values[x] = self.dist.q_function(x)
        return self.values[x]


def mean_weight(alpha: float, l: SlowlyVaryingSpec | None = None) -> float:
    """E[H] for the tail h^(1-alpha) l(h); (alpha-1)/(alpha-2) when l == 1."""
    return TailDistribution(alpha, l).mu


def sample_weight(dist: TailDistribution, uniform: float) -> float:
    """Single inverse-transform draw from an explicit uniform in (0, 1]."""
    return float(dist.inverse_tail(float(uniform)))
