"""Manifold-spec files: an INI layout read with :mod:`configparser`.

Sections are ``[structure]`` (``kind``, ``n`` and, depending on the kind,
``base`` or ``factor``), ``[parameters]`` (reals, comma-separated arrays and
``;``-separated matrix rows) and an optional ``[domain]`` with ``lower`` and
``upper`` corner arrays. See ``docs/spec-format.md`` for the full schema.
"""

import configparser
import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

from . import structures
from .errors import NonPositiveLambda, SpecParseError

KINDS = ("generic", "lambda_deformation", "product_hermitian_line", "sasakian_heisenberg",
         "kaehler_line_product", "conformal_hermitian_line")
FACTORS = ("kaehler", "conformal")
DEFORMATION_BASES = ("sasakian_heisenberg", "kaehler_line_product", "conformal_hermitian_line")

_STRUCTURE_KEYS = {"kind", "n", "base", "factor"}
_POLY_SUFFIXES = ("", "_linear", "_quadratic")
_PARAM_KEYS = {
    "generic": {"metric", "f", "xi", "eta", "q"},
    "lambda_deformation": {"lambda", "lambda_linear", "lambda_quadratic",
                           "u", "u_linear", "u_quadratic"},
    "product_hermitian_line": {"lambda", "u", "u_linear", "u_quadratic"},
    "sasakian_heisenberg": set(),
    "kaehler_line_product": {"lambda"},
    "conformal_hermitian_line": {"lambda", "u", "u_linear", "u_quadratic"},
}
_DOMAIN_KEYS = {"lower", "upper"}


@dataclass(frozen=True)
class Polynomial:
    """Separable quadratic ``c + sum a_i x_i + sum b_i x_i^2`` on chart coordinates."""
    constant: float
    linear: tuple = ()
    quadratic: tuple = ()

    def __call__(self, p):
        out = self.constant
        for i, a in enumerate(self.linear):
            if a:
                out = out + a * p[i]
        for i, b in enumerate(self.quadratic):
            if b:
                out = out + b * p[i] * p[i]
        return out

    @property
    def is_constant(self):
        return not any(self.linear) and not any(self.quadratic)

    def box_minimum(self, lower, upper):
        """Exact minimum over the box: each coordinate term is minimized alone."""
        total = self.constant
        m = max(len(self.linear), len(self.quadratic))
        for i in range(m):
            a = self.linear[i] if i < len(self.linear) else 0.0
            b = self.quadratic[i] if i < len(self.quadratic) else 0.0
            lo, hi = lower[i], upper[i]
            cands = [lo, hi]
            if b > 0 and lo < -a / (2 * b) < hi:
                cands.append(-a / (2 * b))
            total += min(a * x + b * x * x for x in cands)
        return total

    def to_dict(self):
        return {"constant": self.constant, "linear": list(self.linear),
                "quadratic": list(self.quadratic)}


@dataclass
class StructureSpec:
    kind: str
    n: int
    base: str = None
    factor: str = None
    parameters: dict = field(default_factory=dict)
    lower: tuple = None
    upper: tuple = None
    source: str = None

    def to_dict(self):
        def enc(v):
            if isinstance(v, Polynomial):
                return v.to_dict()
            if isinstance(v, np.ndarray):
                return v.tolist()
            return v
        return {
            "kind": self.kind, "n": self.n, "base": self.base, "factor": self.factor,
            "parameters": {k: enc(v) for k, v in sorted(self.parameters.items())},
            "domain": None if self.lower is None else {"lower": list(self.lower),
                                                        "upper": list(self.upper)},
        }

    @property
    def dimension(self):
        if self.kind == "generic":
            return int(np.asarray(self.parameters["metric"]).shape[0])
        if self.kind in ("product_hermitian_line", "kaehler_line_product",
                         "conformal_hermitian_line", "sasakian_heisenberg",
                         "lambda_deformation"):
            return 2 * self.n + 1
        raise SpecParseError(f"unknown kind {self.kind!r}", field="kind")


class _Source:
    """Raw text plus a locator for ``section.key`` line numbers."""

    def __init__(self, text, path=None):
        self.text = text
        self.path = path
        self.lines = text.splitlines()

    def line_of(self, section, key=None):
        current = None
        for no, raw in enumerate(self.lines, 1):
            s = raw.strip()
            m = re.match(r"\[([^\]]+)\]", s)
            if m:
                current = m.group(1).strip().lower()
                if key is None and current == section:
                    return no
                continue
            if key is not None and current == section and re.match(
                    rf"{re.escape(key)}\s*[=:]", s, re.IGNORECASE):
                return no
        return None

    def error(self, message, section, key=None):
        where = f"{section}.{key}" if key else section
        return SpecParseError(message, line=self.line_of(section, key), field=where)


def _floats(src, section, key, raw):
    try:
        vals = [float(tok) for tok in raw.replace(",", " ").split()]
    except ValueError:
        raise src.error(f"expected numbers, got {raw!r}", section, key) from None
    if not vals:
        raise src.error("empty value", section, key)
    if not all(math.isfinite(v) for v in vals):
        raise src.error("values must be finite", section, key)
    return vals


def _matrix(src, key, raw):
    rows = [r for r in raw.split(";") if r.strip()]
    mat = [_floats(src, "parameters", key, r) for r in rows]
    if len({len(r) for r in mat}) != 1:
        raise src.error("matrix rows differ in length", "parameters", key)
    return np.array(mat)


def _polynomial(src, params, name, dim, default=None):
    given = [name + s for s in _POLY_SUFFIXES if name + s in params]
    if not given:
        return default
    c = float(_floats(src, "parameters", name, params[name])[0]) if name in params else 0.0
    if name in params and len(_floats(src, "parameters", name, params[name])) != 1:
        raise src.error("expected a single constant", "parameters", name)

    def coeffs(suffix):
        key = name + suffix
        if key not in params:
            return ()
        vals = _floats(src, "parameters", key, params[key])
        if len(vals) > dim:
            raise src.error(f"at most {dim} coefficients for a {dim}-dimensional chart",
                            "parameters", key)
        return tuple(vals)

    return Polynomial(c, coeffs("_linear"), coeffs("_quadratic"))


def parse_text(text, path=None):
    """Parse spec text into a :class:`StructureSpec`; raises :class:`SpecParseError`."""
    src = _Source(text, path)
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",),
                                   interpolation=None)
    try:
        cp.read_string(text, source=path or "<spec>")
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise SpecParseError(f"malformed spec file: {exc.message}", line=line) from None
    sections = {s.lower(): s for s in cp.sections()}
    for s in sections:
        if s not in ("structure", "parameters", "domain"):
            raise src.error(f"unknown section [{s}]", s)
    if "structure" not in sections:
        raise SpecParseError("missing [structure] section", field="structure")
    st = dict(cp[sections["structure"]])
    for key in st:
        if key not in _STRUCTURE_KEYS:
            raise src.error(f"unknown key {key!r}", "structure", key)
    kind = st.get("kind", "").strip()
    if kind not in KINDS:
        raise src.error(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}",
                        "structure", "kind")
    params = dict(cp[sections["parameters"]]) if "parameters" in sections else {}
    for key in params:
        if key not in _PARAM_KEYS[kind]:
            raise src.error(f"parameter {key!r} is not used by kind {kind}", "parameters", key)

    n = None
    if "n" in st:
        try:
            n = int(st["n"])
        except ValueError:
            raise src.error(f"n must be an integer, got {st['n']!r}", "structure", "n") from None
        if n < 1:
            raise src.error("n must be at least 1", "structure", "n")
    elif kind != "generic":
        raise src.error("missing n", "structure")

    spec = StructureSpec(kind=kind, n=n, source=path)
    if kind == "lambda_deformation":
        spec.base = st.get("base", "sasakian_heisenberg").strip()
        if spec.base not in DEFORMATION_BASES:
            raise src.error(f"base must be one of {', '.join(DEFORMATION_BASES)}",
                            "structure", "base")
    elif "base" in st:
        raise src.error("base is only used by lambda_deformation", "structure", "base")
    if kind == "product_hermitian_line":
        spec.factor = st.get("factor", "").strip()
        if spec.factor not in FACTORS:
            raise src.error(f"factor must be one of {', '.join(FACTORS)}", "structure", "factor")
    elif "factor" in st:
        raise src.error("factor is only used by product_hermitian_line", "structure", "factor")

    if kind == "generic":
        if "metric" not in params or "f" not in params:
            raise src.error("generic structures need metric and f", "parameters")
        for key in ("metric", "f", "q"):
            if key in params:
                spec.parameters[key] = _matrix(src, key, params[key])
        for key in ("xi", "eta"):
            if key in params:
                spec.parameters[key] = np.array(_floats(src, "parameters", key, params[key]))
        d = spec.parameters["metric"].shape[0]
        for key, shape in (("metric", (d, d)), ("f", (d, d)), ("q", (d, d)),
                           ("xi", (d,)), ("eta", (d,))):
            if key in spec.parameters and spec.parameters[key].shape != shape:
                raise src.error(f"{key} must have shape {shape}", "parameters", key)
        if ("xi" in spec.parameters) != ("eta" in spec.parameters):
            raise src.error("xi and eta must be given together", "parameters")
        if spec.n is None:
            spec.n = d // 2
        if d // 2 != spec.n:
            raise src.error(f"n = {spec.n} does not match a {d}-dimensional metric",
                            "structure", "n")
    dim = spec.dimension

    if "domain" in sections:
        dom = dict(cp[sections["domain"]])
        for key in dom:
            if key not in _DOMAIN_KEYS:
                raise src.error(f"unknown key {key!r}", "domain", key)
        if set(dom) != _DOMAIN_KEYS:
            raise src.error("domain needs both lower and upper", "domain")
        lo = _floats(src, "domain", "lower", dom["lower"])
        hi = _floats(src, "domain", "upper", dom["upper"])
        for key, v in (("lower", lo), ("upper", hi)):
            if len(v) != dim:
                raise src.error(f"expected {dim} bounds, got {len(v)}", "domain", key)
        if not all(a < b for a, b in zip(lo, hi)):
            raise src.error("each lower bound must be below its upper bound", "domain", "upper")
        spec.lower, spec.upper = tuple(lo), tuple(hi)
    lower = spec.lower or (-1.0,) * dim
    upper = spec.upper or (1.0,) * dim

    if kind in ("product_hermitian_line", "kaehler_line_product", "conformal_hermitian_line"):
        spec.parameters["lambda"] = _positive_constant(src, params, "lambda")
    if kind == "lambda_deformation":
        lam = _polynomial(src, params, "lambda", dim, default=None)
        if lam is None:
            raise src.error("missing lambda", "parameters")
        low = lam.box_minimum(lower, upper)
        if not low > 0:
            raise NonPositiveLambda(
                f"lambda reaches {low:.6g} on the chart domain; it must stay positive",
                line=src.line_of("parameters", "lambda"), field="parameters.lambda")
        spec.parameters["lambda"] = lam
    if kind in ("conformal_hermitian_line", "lambda_deformation") or spec.factor == "conformal":
        u = _polynomial(src, params, "u", 2 * spec.n)
        if u is not None:
            if kind == "lambda_deformation" and spec.base != "conformal_hermitian_line":
                raise src.error("u only applies to a conformal factor", "parameters", "u")
            spec.parameters["u"] = u
    elif any(k.startswith("u") for k in params):
        raise src.error("u only applies to a conformal factor", "parameters")
    return spec


def _positive_constant(src, params, key):
    if key not in params:
        return 1.0
    vals = _floats(src, "parameters", key, params[key])
    if len(vals) != 1:
        raise src.error("expected a single constant", "parameters", key)
    if not vals[0] > 0:
        raise NonPositiveLambda(f"{key} must be positive, got {vals[0]:g}",
                                line=src.line_of("parameters", key), field=f"parameters.{key}")
    return vals[0]


def parse_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecParseError(f"cannot read spec file: {exc.strerror}") from None
    return parse_text(text, str(path))


def build(spec):
    """Construct the :class:`~econn.fields.FieldBundle` a spec describes."""
    P = spec.parameters
    k = spec.kind
    u = P.get("u")
    if k == "generic":
        b = structures.constant_structure(P["metric"], P["f"], P.get("xi"), P.get("eta"),
                                          P.get("q"))
    elif k == "sasakian_heisenberg":
        b = structures.sasakian_heisenberg(spec.n)
    elif k == "kaehler_line_product":
        b = structures.kaehler_line_product(spec.n, P["lambda"])
    elif k == "conformal_hermitian_line":
        b = structures.conformal_hermitian_line(spec.n, P["lambda"], u)
    elif k == "product_hermitian_line":
        factor = (structures.flat_kaehler(spec.n) if spec.factor == "kaehler"
                  else structures.conformal_hermitian(spec.n, u))
        b = structures.product_hermitian_line(factor, P["lambda"])
    elif k == "lambda_deformation":
        if spec.base == "sasakian_heisenberg":
            base = structures.sasakian_heisenberg(spec.n)
        elif spec.base == "kaehler_line_product":
            base = structures.kaehler_line_product(spec.n, 1.0)
        else:
            base = structures.conformal_hermitian_line(spec.n, 1.0, u)
        if spec.lower is not None:
            base = replace(base, lower=spec.lower, upper=spec.upper)
        lam = P["lambda"]
        lo, hi = base.bounds()
        b = structures.deform_lambda(base, lam.constant if lam.is_constant else lam,
                                     lam_min=lam.box_minimum(lo, hi))
    else:  # pragma: no cover - parse_text rejects unknown kinds
        raise SpecParseError(f"unknown kind {k!r}", field="kind")
    if spec.lower is not None:
        b = replace(b, lower=spec.lower, upper=spec.upper)
    return b
