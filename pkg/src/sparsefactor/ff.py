"""Finite prime fields F_p and small extensions F_{p^k}.

Elements are plain Python ints in [0, p^k).  An int encodes the coefficient
vector of a residue polynomial in base p: e = sum(c_i * p^i) represents
sum(c_i * t^i) mod modulus.  For k = 1 this is the usual residue.  The
canonical enumeration of the field is simply 0, 1, ..., p^k - 1, and all
deterministic "first elements" choices elsewhere refer to this order.
"""

from __future__ import annotations

from .config import LOG_TABLE_LIMIT, MAX_FIELD_SIZE
from .errors import DivisionByZero, NotPrime, SizeOverflow

Fe = int

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin; exact for every n below 3.3e24."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """First prime strictly greater than n."""
    c = n + 1
    if c <= 2:
        return 2
    if c % 2 == 0:
        c += 1
    while not is_prime(c):
        c += 2
    return c


def _digits(e: int, p: int, k: int) -> list[int]:
    out = []
    for _ in range(k):
        out.append(e % p)
        e //= p
    return out


def _undigits(cs, p: int) -> int:
    out = 0
    for c in reversed(list(cs)):
        out = out * p + c
    return out


class FieldDesc:
    """A finite field F_{p^k} with a fixed monic modulus for k > 1.

    Immutable; construction happens through build_extension so that two
    builds of the same (p, k) are bit-identical.
    """

    __slots__ = ("p", "k", "size", "modulus", "_exp", "_log", "_gen")

    def __init__(self, p: int, k: int, modulus: tuple[int, ...] | None):
        self.p = p
        self.k = k
        self.size = p ** k
        # modulus is the full monic coefficient tuple (c_0, ..., c_{k-1}, 1),
        # absent for prime fields.
        self.modulus = modulus
        self._exp: list[int] | None = None
        self._log: dict[int, int] | None = None
        self._gen: int | None = None
        if k > 1 and self.size <= LOG_TABLE_LIMIT:
            self._build_tables()

    # -- identity ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FieldDesc)
            and self.p == other.p
            and self.k == other.k
            and self.modulus == other.modulus
        )

    def __hash__(self) -> int:
        return hash((self.p, self.k, self.modulus))

    def __repr__(self) -> str:
        if self.k == 1:
            return f"F_{self.p}"
        return f"F_{self.p}^{self.k}"

    def to_json(self) -> dict:
        mod = list(self.modulus) if self.modulus is not None else []
        return {"p": self.p, "k": self.k, "modulus": mod}

    # -- characteristic regime -------------------------------------------

    def char_class(self, d: int) -> str:
        """LARGE when p > 2d: the regime where char-0 arguments transfer."""
        return "LARGE" if self.p > 2 * d else "SMALL"

    # -- element helpers ---------------------------------------------------

    def of_int(self, c: int) -> Fe:
        """Canonical injection of an integer residue (prime subfield)."""
        return c % self.p

    def elements(self):
        return range(self.size)

    def element_poly(self, e: Fe) -> list[int]:
        return _digits(e, self.p, self.k)

    # -- arithmetic --------------------------------------------------------

    def add(self, a: Fe, b: Fe) -> Fe:
        if self.k == 1:
            return (a + b) % self.p
        p = self.p
        out = 0
        mul = 1
        while a or b:
            out += ((a % p + b % p) % p) * mul
            a //= p
            b //= p
            mul *= p
        return out

    def neg(self, a: Fe) -> Fe:
        if self.k == 1:
            return (-a) % self.p
        p = self.p
        out = 0
        mul = 1
        while a:
            out += ((-a) % p % p) * mul
            a //= p
            mul *= p
        return out

    def sub(self, a: Fe, b: Fe) -> Fe:
        return self.add(a, self.neg(b))

    def mul(self, a: Fe, b: Fe) -> Fe:
        if self.k == 1:
            return a * b % self.p
        if a == 0 or b == 0:
            return 0
        if self._exp is not None:
            return self._exp[(self._log[a] + self._log[b]) % (self.size - 1)]
        return self._mul_poly(a, b)

    def _mul_poly(self, a: Fe, b: Fe) -> Fe:
        p, k = self.p, self.k
        da = _digits(a, p, k)
        db = _digits(b, p, k)
        prod = [0] * (2 * k - 1)
        for i, ca in enumerate(da):
            if ca:
                for j, cb in enumerate(db):
                    if cb:
                        prod[i + j] = (prod[i + j] + ca * cb) % p
        mod = self.modulus
        for i in range(len(prod) - 1, k - 1, -1):
            c = prod[i]
            if c:
                prod[i] = 0
                for j in range(k):
                    prod[i - k + j] = (prod[i - k + j] - c * mod[j]) % p
        return _undigits(prod[:k], p)

    def pow(self, a: Fe, e: int) -> Fe:
        if self.k == 1:
            if e < 0:
                return pow(self.inv(a), -e, self.p)
            return pow(a, e, self.p)
        if e < 0:
            a = self.inv(a)
            e = -e
        if a == 0:
            return 0 if e else 1
        if self._exp is not None:
            return self._exp[self._log[a] * e % (self.size - 1)]
        out = 1
        base = a
        while e:
            if e & 1:
                out = self._mul_poly(out, base) if out != 1 else base
            base = self._mul_poly(base, base)
            e >>= 1
        return out

    def inv(self, a: Fe) -> Fe:
        if a == 0:
            raise DivisionByZero("inverse of zero")
        if self.k == 1:
            return pow(a, -1, self.p)
        if self._exp is not None:
            return self._exp[(self.size - 1 - self._log[a]) % (self.size - 1)]
        return self.pow(a, self.size - 2)

    def div(self, a: Fe, b: Fe) -> Fe:
        return self.mul(a, self.inv(b))

    # -- tables -------------------------------------------------------------

    def _build_tables(self) -> None:
        n1 = self.size - 1
        for g in range(2, self.size):
            # smallest element of full multiplicative order
            seen = 1
            x = g
            order = 1
            while x != 1:
                x = self._mul_poly(x, g)
                order += 1
                if order > n1:
                    break
            if order == n1:
                self._gen = g
                break
        assert self._gen is not None, "no generator found"
        exp = [1] * n1
        log = {1: 0}
        x = 1
        for i in range(1, n1):
            x = self._mul_poly(x, self._gen)
            exp[i] = x
            log[x] = i
        self._exp = exp
        self._log = log


# -- modulus search ----------------------------------------------------------


def _uni_gcd_fp(a: list[int], b: list[int], p: int) -> list[int]:
    a = [c % p for c in a]
    b = [c % p for c in b]
    while any(b):
        while b and b[-1] == 0:
            b.pop()
        if not b:
            break
        inv = pow(b[-1], -1, p)
        while len(a) >= len(b) and any(a):
            while a and a[-1] == 0:
                a.pop()
            if len(a) < len(b):
                break
            c = a[-1] * inv % p
            off = len(a) - len(b)
            for i, cb in enumerate(b):
                a[off + i] = (a[off + i] - c * cb) % p
        a, b = b, a
    while a and a[-1] == 0:
        a.pop()
    return a


def _uni_powmod_fp(base: list[int], e: int, mod: list[int], p: int) -> list[int]:
    def mul(u, v):
        out = [0] * (len(u) + len(v) - 1)
        for i, cu in enumerate(u):
            if cu:
                for j, cv in enumerate(v):
                    if cv:
                        out[i + j] = (out[i + j] + cu * cv) % p
        # reduce mod the monic modulus
        dm = len(mod) - 1
        for i in range(len(out) - 1, dm - 1, -1):
            c = out[i]
            if c:
                out[i] = 0
                for j in range(dm):
                    out[i - dm + j] = (out[i - dm + j] - c * mod[j]) % p
        out = out[:dm]
        while out and out[-1] == 0:
            out.pop()
        return out

    result = [1]
    b = base[:]
    while e:
        if e & 1:
            result = mul(result, b)
        b = mul(b, b)
        e >>= 1
    return result


def _is_irreducible_fp(coeffs: tuple[int, ...], p: int) -> bool:
    """coeffs is the full monic coefficient tuple, degree k = len - 1."""
    k = len(coeffs) - 1
    mod = list(coeffs)
    x = [0, 1]
    # x^(p^k) == x mod m
    xq = _uni_powmod_fp(x, p ** k, mod, p)
    rem = [(a - b) % p for a, b in
           zip(xq + [0] * (2 - len(xq)), x + [0] * (2 - len(x)))]
    lead = max(len(xq), 2)
    diff = [0] * lead
    for i, c in enumerate(xq):
        diff[i] = c
    diff[1] = (diff[1] - 1) % p
    if any(diff):
        return False
    del rem
    # gcd(x^(p^(k/r)) - x, m) must be trivial for every prime r | k
    kk = k
    primes = []
    f = 2
    while f * f <= kk:
        if kk % f == 0:
            primes.append(f)
            while kk % f == 0:
                kk //= f
        f += 1
    if kk > 1:
        primes.append(kk)
    for r in primes:
        xe = _uni_powmod_fp(x, p ** (k // r), mod, p)
        diff = [0] * max(len(xe), 2)
        for i, c in enumerate(xe):
            diff[i] = c
        diff[1] = (diff[1] - 1) % p
        g = _uni_gcd_fp(diff, mod, p)
        if len(g) != 1:
            return False
    return True


def build_extension(p: int, k: int) -> FieldDesc:
    """Deterministic field constructor.

    The modulus for k > 1 is the first irreducible monic polynomial in the
    enumeration where the non-leading coefficient vector (c_0, ..., c_{k-1})
    counts up as base-p digits of 0, 1, 2, ...
    """
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if k < 1:
        raise SizeOverflow("extension degree must be >= 1")
    if p ** k > MAX_FIELD_SIZE:
        raise SizeOverflow(f"field size {p ** k} exceeds bound {MAX_FIELD_SIZE}")
    if k == 1:
        return FieldDesc(p, 1, None)
    for code in range(p ** k):
        lower = tuple(_digits(code, p, k))
        coeffs = lower + (1,)
        if _is_irreducible_fp(coeffs, p):
            return FieldDesc(p, k, coeffs)
    raise SizeOverflow("no irreducible modulus found")  # unreachable


def field_arith(field: FieldDesc, a: Fe, b: Fe, op: str) -> Fe:
    """Functional entry point for single field operations."""
    if op == "add":
        return field.add(a, b)
    if op == "sub":
        return field.sub(a, b)
    if op == "mul":
        return field.mul(a, b)
    if op == "div":
        if b == 0:
            raise DivisionByZero("division by zero")
        return field.div(a, b)
    if op == "inv":
        return field.inv(a)
    if op == "pow":
        return field.pow(a, b)
    raise ValueError(f"unknown op {op!r}")


# -- embeddings ---------------------------------------------------------------


class FieldEmbedding:
    """The canonical embedding F_{p^k} -> F_{p^(k*j)}.

    Maps the small field's generator-of-representation t to the first root
    of the small modulus in the big field (scan in canonical element order),
    which makes the embedding deterministic.
    """

    def __init__(self, small: FieldDesc, big: FieldDesc):
        if small.p != big.p or big.k % small.k != 0:
            raise ValueError("no embedding between these fields")
        self.small = small
        self.big = big
        self._fwd: dict[int, int] = {}
        self._bwd: dict[int, int] = {}
        if small.k == 1:
            self.root = None
        else:
            self.root = self._find_root()

    def _find_root(self) -> Fe:
        mod = self.small.modulus
        big = self.big
        for cand in big.elements():
            acc = 0
            power = 1
            for c in mod:
                if c:
                    acc = big.add(acc, big.mul(big.of_int(c), power))
                power = big.mul(power, cand)
            if acc == 0:
                return cand
        raise ValueError("modulus has no root in the big field")  # impossible

    def fwd(self, e: Fe) -> Fe:
        if self.small.k == 1:
            return e
        got = self._fwd.get(e)
        if got is None:
            big = self.big
            acc = 0
            power = 1
            for c in self.small.element_poly(e):
                if c:
                    acc = big.add(acc, big.mul(big.of_int(c), power))
                power = big.mul(power, self.root)
            self._fwd[e] = acc
            self._bwd[acc] = e
            got = acc
        return got

    def bwd(self, e: Fe) -> Fe | None:
        """Inverse map; None when e is outside the embedded subfield."""
        if self.small.k == 1:
            return e if e < self.small.p else None
        if e in self._bwd:
            return self._bwd[e]
        # force full table once; the small field is small by construction
        for x in self.small.elements():
            self.fwd(x)
        return self._bwd.get(e)


def extension_of(field: FieldDesc, factor: int) -> FieldDesc:
    """F_{p^(k*factor)} built deterministically."""
    return build_extension(field.p, field.k * factor)
