"""Tiny expression language for user-supplied smooth functions.

Grammar (EBNF, also documented in the README):

    expr    = term { ("+" | "-") term } ;
    term    = factor { ("*" | "/") factor } ;
    factor  = base [ "^" integer ] | "-" factor ;
    base    = number | variable | func "(" expr ")" | "(" expr ")" ;
    func    = "sin" | "cos" | "exp" | "tanh" ;
    variable= "x" digits ;

Precedence: ^ binds tighter than unary minus, which binds tighter than * /,
which bind tighter than + -.  The language is closed under differentiation
and deliberately has no abs/min/max, so every expressible function is smooth.
"""

import math

import numpy as np

from .errors import ConfigError, EvalError
from .fields import ScalarField

_UNARY = {
    "sin": (math.sin, np.sin),
    "cos": (math.cos, np.cos),
    "exp": (math.exp, np.exp),
    "tanh": (math.tanh, np.tanh),
}


class Expr:
    """AST node. Immutable; eval/diff are pure."""

    def eval(self, x):
        v = self._eval(x)
        if not math.isfinite(v):
            raise EvalError(f"non-finite value in {self!r}")
        return v

    def eval_many(self, X):
        v = self._eval_many(np.asarray(X, dtype=float))
        if not np.all(np.isfinite(v)):
            raise EvalError(f"non-finite value in {self!r}")
        return v


class Const(Expr):
    def __init__(self, c):
        self.c = float(c)

    def _eval(self, x):
        return self.c

    def _eval_many(self, X):
        return np.full(len(X), self.c)

    def diff(self, j):
        return Const(0.0)

    def __repr__(self):
        return repr(self.c)

    def to_str(self, prec=0):
        s = f"{self.c:.17g}"
        return f"({s})" if self.c < 0 and prec > 0 else s


class Var(Expr):
    def __init__(self, j):
        self.j = int(j)  # 1-based

    def _eval(self, x):
        return float(x[self.j - 1])

    def _eval_many(self, X):
        return X[:, self.j - 1]

    def diff(self, j):
        return Const(1.0 if j == self.j else 0.0)

    def __repr__(self):
        return f"x{self.j}"

    def to_str(self, prec=0):
        return f"x{self.j}"


class Unary(Expr):
    def __init__(self, name, arg):
        self.name = name
        self.arg = arg

    def _eval(self, x):
        return _UNARY[self.name][0](self.arg.eval(x))

    def _eval_many(self, X):
        return _UNARY[self.name][1](self.arg.eval_many(X))

    def diff(self, j):
        da = self.arg.diff(j)
        if self.name == "sin":
            return Mul(Unary("cos", self.arg), da)
        if self.name == "cos":
            return Neg(Mul(Unary("sin", self.arg), da))
        if self.name == "exp":
            return Mul(self, da)
        # tanh' = 1 - tanh^2
        return Mul(Sub(Const(1.0), Pow(Unary("tanh", self.arg), 2)), da)

    def __repr__(self):
        return f"{self.name}({self.arg!r})"

    def to_str(self, prec=0):
        return f"{self.name}({self.arg.to_str()})"


class Neg(Expr):
    def __init__(self, arg):
        self.arg = arg

    def _eval(self, x):
        return -self.arg.eval(x)

    def _eval_many(self, X):
        return -self.arg.eval_many(X)

    def diff(self, j):
        return Neg(self.arg.diff(j))

    def __repr__(self):
        return f"(-{self.arg!r})"

    def to_str(self, prec=0):
        s = f"-{self.arg.to_str(3)}"
        return f"({s})" if prec >= 2 else s


class _Bin(Expr):
    op = "?"
    prec = 0

    def __init__(self, a, b):
        self.a, self.b = a, b

    def __repr__(self):
        return f"({self.a!r} {self.op} {self.b!r})"

    def to_str(self, prec=0):
        s = f"{self.a.to_str(self.prec)} {self.op} {self.b.to_str(self.prec + 1)}"
        return f"({s})" if prec > self.prec else s


class Add(_Bin):
    op, prec = "+", 1

    def _eval(self, x):
        return self.a.eval(x) + self.b.eval(x)

    def _eval_many(self, X):
        return self.a.eval_many(X) + self.b.eval_many(X)

    def diff(self, j):
        return Add(self.a.diff(j), self.b.diff(j))


class Sub(_Bin):
    op, prec = "-", 1

    def _eval(self, x):
        return self.a.eval(x) - self.b.eval(x)

    def _eval_many(self, X):
        return self.a.eval_many(X) - self.b.eval_many(X)

    def diff(self, j):
        return Sub(self.a.diff(j), self.b.diff(j))


class Mul(_Bin):
    op, prec = "*", 2

    def _eval(self, x):
        return self.a.eval(x) * self.b.eval(x)

    def _eval_many(self, X):
        return self.a.eval_many(X) * self.b.eval_many(X)

    def diff(self, j):
        return Add(Mul(self.a.diff(j), self.b), Mul(self.a, self.b.diff(j)))


class Div(_Bin):
    op, prec = "/", 2

    def _eval(self, x):
        den = self.b.eval(x)
        if abs(den) < 1e-300:
            raise EvalError(f"division by near-zero denominator in {self!r}")
        return self.a.eval(x) / den

    def _eval_many(self, X):
        den = self.b.eval_many(X)
        if np.any(np.abs(den) < 1e-300):
            raise EvalError(f"division by near-zero denominator in {self!r}")
        return self.a.eval_many(X) / den

    def diff(self, j):
        num = Sub(Mul(self.a.diff(j), self.b), Mul(self.a, self.b.diff(j)))
        return Div(num, Pow(self.b, 2))


class Pow(Expr):
    """Integer power; negative exponents carry the division guard."""

    def __init__(self, base, k):
        self.base = base
        self.k = int(k)

    def _eval(self, x):
        b = self.base.eval(x)
        if self.k < 0 and abs(b) < 1e-300:
            raise EvalError(f"division by near-zero base in {self!r}")
        return float(b ** self.k)

    def _eval_many(self, X):
        b = self.base.eval_many(X)
        if self.k < 0 and np.any(np.abs(b) < 1e-300):
            raise EvalError(f"division by near-zero base in {self!r}")
        return b ** float(self.k)

    def diff(self, j):
        if self.k == 0:
            return Const(0.0)
        return Mul(Mul(Const(self.k), Pow(self.base, self.k - 1)), self.base.diff(j))

    def __repr__(self):
        return f"({self.base!r}^{self.k})"

    def to_str(self, prec=0):
        s = f"{self.base.to_str(4)}^{self.k}"
        return f"({s})" if prec > 3 else s


def _is_const(e, c=None):
    return isinstance(e, Const) and (c is None or e.c == c)


def const_fold(e):
    """Collapse constant subtrees and unit/zero identities."""
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Neg):
        a = const_fold(e.arg)
        return Const(-a.c) if isinstance(a, Const) else Neg(a)
    if isinstance(e, Unary):
        a = const_fold(e.arg)
        return Const(_UNARY[e.name][0](a.c)) if isinstance(a, Const) else Unary(e.name, a)
    if isinstance(e, Pow):
        b = const_fold(e.base)
        if isinstance(b, Const):
            return Const(b.c ** e.k)
        if e.k == 1:
            return b
        if e.k == 0:
            return Const(1.0)
        return Pow(b, e.k)
    a, b = const_fold(e.a), const_fold(e.b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(type(e)(a, b)._eval(None))
    if isinstance(e, Add):
        if _is_const(a, 0.0):
            return b
        if _is_const(b, 0.0):
            return a
    if isinstance(e, Sub):
        if _is_const(b, 0.0):
            return a
        if _is_const(a, 0.0):
            return const_fold(Neg(b))
    if isinstance(e, Mul):
        if _is_const(a, 0.0) or _is_const(b, 0.0):
            return Const(0.0)
        if _is_const(a, 1.0):
            return b
        if _is_const(b, 1.0):
            return a
    return type(e)(a, b)


def expr_equal(a, b):
    a, b = const_fold(a), const_fold(b)
    if type(a) is not type(b):
        return False
    if isinstance(a, Const):
        return a.c == b.c
    if isinstance(a, Var):
        return a.j == b.j
    if isinstance(a, Neg):
        return expr_equal(a.arg, b.arg)
    if isinstance(a, Unary):
        return a.name == b.name and expr_equal(a.arg, b.arg)
    if isinstance(a, Pow):
        return a.k == b.k and expr_equal(a.base, b.base)
    return expr_equal(a.a, b.a) and expr_equal(a.b, b.b)


class _Parser:
    def __init__(self, text, dim):
        self.text = text
        self.dim = dim
        self.pos = 0

    def error(self, msg):
        raise ConfigError(f"syntax error at position {self.pos + 1}: {msg}")

    def peek(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expr(self):
        node = self.term()
        while True:
            c = self.peek()
            if c == "+":
                self.pos += 1
                node = Add(node, self.term())
            elif c == "-":
                self.pos += 1
                node = Sub(node, self.term())
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            c = self.peek()
            if c == "*":
                self.pos += 1
                node = Mul(node, self.factor())
            elif c == "/":
                self.pos += 1
                node = Div(node, self.factor())
            else:
                return node

    def factor(self):
        if self.peek() == "-":
            self.pos += 1
            return Neg(self.factor())
        node = self.base()
        if self.peek() == "^":
            self.pos += 1
            neg = False
            if self.peek() == "-":
                neg = True
                self.pos += 1
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if self.pos == start:
                self.error("expected integer exponent")
            k = int(self.text[start:self.pos])
            return Pow(node, -k if neg else k)
        return node

    def base(self):
        c = self.peek()
        if c == "(":
            self.pos += 1
            node = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return node
        if c.isdigit() or c == ".":
            start = self.pos
            while self.pos < len(self.text) and (self.text[self.pos].isdigit()
                                                 or self.text[self.pos] in ".eE"
                                                 or (self.text[self.pos] in "+-"
                                                     and self.text[self.pos - 1] in "eE")):
                self.pos += 1
            try:
                return Const(float(self.text[start:self.pos]))
            except ValueError:
                self.pos = start
                self.error("bad number literal")
        if c.isalpha():
            start = self.pos
            while self.pos < len(self.text) and (self.text[self.pos].isalnum()
                                                 or self.text[self.pos] == "_"):
                self.pos += 1
            name = self.text[start:self.pos]
            if name[0] == "x" and name[1:].isdigit():
                j = int(name[1:])
                if not 1 <= j <= self.dim:
                    self.pos = start
                    self.error(f"variable index out of range: {name} with dim {self.dim}")
                return Var(j)
            if name in _UNARY:
                if self.peek() != "(":
                    self.error(f"expected '(' after {name}")
                self.pos += 1
                node = self.expr()
                if self.peek() != ")":
                    self.error("expected ')'")
                self.pos += 1
                return Unary(name, node)
            self.pos = start
            self.error(f"unknown identifier '{name}'")
        self.error("expected number, variable, function or '('")


def parse(text, dim):
    """Parse an expression over variables x1..x<dim>."""
    if not isinstance(text, str) or not text.strip():
        raise ConfigError("empty expression")
    p = _Parser(text, int(dim))
    node = p.expr()
    if p.peek() != "":
        p.error("trailing input")
    return node


def diff(e, j):
    """Exact symbolic partial derivative with respect to x<j> (1-based)."""
    return const_fold(e.diff(j))


class FieldHandle(ScalarField):
    """Expression plus its exact symbolic gradient, usable as a ScalarField."""

    def __init__(self, expr, dim):
        if isinstance(expr, str):
            expr = parse(expr, dim)
        self.expr = expr
        self.dim = int(dim)
        self.grad_exprs = [diff(expr, j) for j in range(1, self.dim + 1)]

    def value(self, x):
        return self.expr.eval(np.asarray(x, dtype=float))

    def value_many(self, X):
        return self.expr.eval_many(X)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        return np.array([g.eval(x) for g in self.grad_exprs])

    def gradient_many(self, X):
        X = np.asarray(X, dtype=float)
        return np.stack([g.eval_many(X) for g in self.grad_exprs], axis=1)


def halton_points(dim, m, skip=0):
    """Deterministic low-discrepancy points in [0,1)^dim (unscrambled Halton)."""
    from scipy.stats import qmc
    h = qmc.Halton(d=dim, scramble=False)
    if skip:
        h.fast_forward(skip)
    return h.random(m)


def lipschitz_estimate(F, region, samples, subspace=None):
    """Empirical lower bound for the Lipschitz constant of F.

    Maximum gradient norm over a fixed low-discrepancy sequence (prefix
    property makes the estimate monotone in `samples`).  `region` is a Box;
    pass `subspace` to restrict sampling to Y∩box and measure Lip(F|_Y).
    """
    if samples < 2:
        raise ConfigError("samples must be >= 2")
    box = region
    if subspace is None:
        U = halton_points(box.dim, samples)
        P = box.lo + U * (box.hi - box.lo)
        G = F.gradient_many(P)
        return float(np.max(np.linalg.norm(G, axis=1))) if len(P) else 0.0
    S = subspace
    intervals = [S.coord_interval(box, b) for b in S.basis]
    lo = np.array([iv[0] for iv in intervals])
    hi = np.array([iv[1] for iv in intervals])
    got, skip, best = 0, 0, 0.0
    while got < samples and skip < 50 * samples + 1000:
        U = halton_points(S.k, samples, skip=skip)
        skip += samples
        P = (lo + U * (hi - lo)) @ S.basis
        mask = np.all((P >= box.lo - 1e-12) & (P <= box.hi + 1e-12), axis=1)
        P = P[mask]
        if len(P) == 0:
            continue
        G = F.gradient_many(P)
        Gy = G @ S.basis.T  # Lip of the restriction sees only Y-directions
        best = max(best, float(np.max(np.linalg.norm(Gy, axis=1))))
        got += len(P)
    return best
