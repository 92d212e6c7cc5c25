"""Eigenform ingestion, conjugation, and representation typing.

Coefficient data arrives as JSON records (bundled with the package, read
from disk, or fetched from a configurable remote endpoint with a local
cache).  Records are validated exactly: normalization, multiplicativity
spot checks, involution of the declared conjugation, and the declared
cyclotomic embedding of the coefficient field when one is present.

`classify_representation` decides the type of a trivial-nebentypus
newform of level p^2: either it is the twist of a level-p form by a
character mu with mu^2 equal to that form's nebentypus (principal series,
or twisted Steinberg when mu is the quadratic character), or it is
cuspidal, attached to a character theta of the nonsplit torus.  The
cuspidal parameter is found by exact descent: the multiplier series of a
candidate theta must lie in the real field K_f(zeta_p)^+, which pins the
Galois orbit of theta with no floating point involved.
"""

import json
import math
import os
import random
import tempfile
import urllib.error
import urllib.request
from datetime import date
from fractions import Fraction
from importlib import resources

from .exactfield import (CycloElt, GaloisAction, Subfield, SubfieldMismatch,
                         Tower, TowerElt, euler_phi, galois_apply,
                         rewrite_conductor)
from .gl2reps import CharacterMu, CharacterTheta, cusp_series_multipliers
from .qseries import DescentFailure, QSeries, series_descend_subfield

RESPONSE_FORMAT = 1
PATH_TEMPLATE = "{base}/{label}.json"
PROBE_TERMS = 60


class SchemaError(ValueError):
    """Malformed record file: missing keys, bad shapes, bad types."""


class InvariantError(ValueError):
    """Well-formed record whose contents are inconsistent."""

    def __init__(self, message, index=None):
        super().__init__(message if index is None
                         else f"{message} (index {index})")
        self.index = index


class FetchError(RuntimeError):
    """Remote or bundled lookup failed."""


class ClassificationError(RuntimeError):
    """No representation type fits the record."""

    def __init__(self, message, evidence=None):
        super().__init__(message)
        self.evidence = evidence or {}


class AmbiguousClassification(ClassificationError):
    """Several incomparable types fit; surfaced instead of guessed."""


# ----------------------------------------------------------------------
# records


def _fractions(payload):
    try:
        return [Fraction(str(s)) for s in payload]
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise SchemaError(f"bad rational payload {payload!r}") from exc


def _parse_elt(tower, payload):
    if not isinstance(payload, list) or len(payload) != tower.ext_degree:
        raise SchemaError(f"coefficient needs {tower.ext_degree} field "
                          f"coordinates, got {payload!r}")
    return TowerElt(tower, [CycloElt(tower.m, _fractions(c)) for c in payload])


class EigenformRecord:
    """One newform: label, level, nebentypus data, and exact a_n.

    `tower` is the coefficient field K_f, `an[i]` holds a_(i+1), `conj`
    realizes complex conjugation on the field, `embedding` (optional) is
    a verified pair (M, z) with z in Q(zeta_M) a root of the extension
    polynomial, and `fricke` (optional) the W_(p^2) eigenvalue of a
    level-p^2 form.  Records are immutable once validated.
    """

    __slots__ = ("label", "level", "char_order", "char_exponent", "tower",
                 "an", "ap", "conj", "embedding", "fricke", "source")

    def __init__(self, label, level, char_order, char_exponent, tower,
                 an, ap, conj, embedding, fricke, source):
        self.label = label
        self.level = level
        self.char_order = char_order
        self.char_exponent = char_exponent
        self.tower = tower
        self.an = tuple(an)
        self.ap = ap
        self.conj = conj
        self.embedding = embedding
        self.fricke = fricke
        self.source = source

    @property
    def precision(self):
        return len(self.an)

    def coeff(self, n):
        """a_n, 1-indexed."""
        if not 1 <= n <= len(self.an):
            raise IndexError(f"a_{n} beyond precision {len(self.an)}")
        return self.an[n - 1]

    def __eq__(self, other):
        if not isinstance(other, EigenformRecord):
            return NotImplemented
        return (self.label == other.label and self.level == other.level
                and self.char_order == other.char_order
                and self.char_exponent == other.char_exponent
                and self.tower == other.tower and self.an == other.an
                and self.ap == other.ap)

    def __repr__(self):
        return (f"EigenformRecord({self.label}, level {self.level}, "
                f"{len(self.an)} coefficients)")

    def validate(self):
        if self.coeff(1) != self.tower.one():
            raise InvariantError("a_1 != 1", index=1)
        self._check_multiplicative()
        self._check_involution()
        if self.char_order > 1:
            p = self.level if _is_prime(self.level) else None
            if p is not None:
                e = self.char_exponent
                if e is None:
                    raise SchemaError("nontrivial nebentypus needs "
                                      "char_exponent")
                if (p - 1) // math.gcd(e, p - 1) != self.char_order:
                    raise InvariantError("char_exponent order mismatch")
        return self

    def _check_multiplicative(self):
        # the smallest coprime pair is always checked, then 20 random ones
        n_max = len(self.an)
        if math.isqrt(n_max) < 2:
            return
        rng = random.Random(f"mult:{self.label}")
        pairs = [(2, 3)] if n_max >= 6 else []
        for _ in range(20):
            m = rng.randrange(2, math.isqrt(n_max) + 1)
            n = rng.randrange(2, n_max // m + 1)
            pairs.append((m, n))
        for m, n in pairs:
            if math.gcd(m, n) != 1:
                continue
            if self.coeff(m * n) != self.coeff(m) * self.coeff(n):
                raise InvariantError(
                    f"a_{m * n} != a_{m} a_{n}", index=m * n)

    def _check_involution(self):
        t = self.tower
        if t.ext_degree > 1:
            if self.conj.gen_image is None:
                raise SchemaError("extension field needs "
                                  "conj_generator_image")
            twice = galois_apply(self.conj, self.conj.gen_image)
            if twice != t.gen():
                raise InvariantError("conjugation is not an involution")
        elif (-self.conj.exponent) % t.m != 1 % t.m:
            raise InvariantError("conjugation is not an involution")


def _is_prime(n):
    if n < 2:
        return False
    for q in range(2, math.isqrt(n) + 1):
        if n % q == 0:
            return False
    return True


def _rank(rows):
    mat = [list(r) for r in rows]
    rank, col, width = 0, 0, len(mat[0]) if mat else 0
    while rank < len(mat) and col < width:
        piv = next((r for r in range(rank, len(mat)) if mat[r][col]), None)
        if piv is None:
            col += 1
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        inv = 1 / mat[rank][col]
        mat[rank] = [x * inv for x in mat[rank]]
        for r in range(len(mat)):
            if r != rank and mat[r][col]:
                f = mat[r][col]
                mat[r] = [x - f * y for x, y in zip(mat[r], mat[rank])]
        rank += 1
        col += 1
    return rank


def _solve_in_span(basis, target):
    """Rational coordinates of target in the Q-span of basis, else None."""
    k = len(basis)
    aug = [[b[j] for b in basis] + [target[j]] for j in range(len(target))]
    pivots = []
    row = 0
    for col in range(k):
        piv = next((r for r in range(row, len(aug)) if aug[r][col]), None)
        if piv is None:
            continue
        aug[row], aug[piv] = aug[piv], aug[row]
        inv = 1 / aug[row][col]
        aug[row] = [x * inv for x in aug[row]]
        for r in range(len(aug)):
            if r != row and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[row])]
        pivots.append(col)
        row += 1
    for r in aug[row:]:
        if r[k] != 0:
            return None
    sol = [Fraction(0)] * k
    for i, col in enumerate(pivots):
        sol[col] = aug[i][k]
    return sol


def _verify_embedding(tower, cond, gen_image, powers):
    """gen_image must be a root of the extension polynomial and its
    powers must stay Q-independent (so the map is a field embedding)."""
    if tower.m != 1:
        raise SchemaError("declared embeddings are only supported over "
                          "a rational base field")
    acc = CycloElt.zero(cond)
    top = CycloElt.one(cond)
    for e in tower.ext_poly:
        acc = acc + top * e.rational_value()
        top = top * gen_image
    if not (acc + top).is_zero():
        raise InvariantError("embedding image is not a root of the "
                             "extension polynomial")
    if _rank([z.c for z in powers]) != tower.ext_degree:
        raise InvariantError("embedding image does not generate a field "
                             "of the right degree")


_REQUIRED = ("label", "level", "weight", "char_order", "field",
             "conj_generator_image", "ap", "an", "source")


def _record_from_obj(obj):
    if not isinstance(obj, dict):
        raise SchemaError("record must be a JSON object")
    missing = [k for k in _REQUIRED if k not in obj]
    if missing:
        raise SchemaError(f"missing keys: {', '.join(missing)}")
    if obj["weight"] != 2:
        raise SchemaError(f"only weight 2 is supported, got "
                          f"{obj['weight']!r}")
    level = obj["level"]
    if not isinstance(level, int) or level < 1:
        raise SchemaError(f"bad level {level!r}")
    try:
        tower = Tower.from_descriptor(obj["field"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad field descriptor: {exc}") from exc
    if not obj["an"]:
        raise SchemaError("empty coefficient list")
    an = [_parse_elt(tower, c) for c in obj["an"]]
    ap = _parse_elt(tower, obj["ap"]) if obj["ap"] is not None else None
    gen_image = None
    if obj["conj_generator_image"] is not None:
        gen_image = _parse_elt(tower, obj["conj_generator_image"])
    conj = GaloisAction(-1, gen_image)
    embedding = None
    if obj.get("embedding") is not None:
        emb = obj["embedding"]
        try:
            cond = int(emb["conductor"])
            z = CycloElt(cond, _fractions(emb["gen_image"]))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"bad embedding block: {exc}") from exc
        powers = [CycloElt.one(cond)]
        for _ in range(tower.ext_degree - 1):
            powers.append(powers[-1] * z)
        _verify_embedding(tower, cond, z, powers)
        embedding = (cond, tuple(powers))
    fricke = obj.get("fricke")
    if fricke not in (None, 1, -1):
        raise SchemaError(f"fricke must be +-1, got {fricke!r}")
    rec = EigenformRecord(
        label=str(obj["label"]), level=level,
        char_order=int(obj["char_order"]),
        char_exponent=obj.get("char_exponent"), tower=tower, an=an, ap=ap,
        conj=conj, embedding=embedding, fricke=fricke, source=obj["source"])
    return rec.validate()


def parse_eigenform_file(path):
    """Read, parse, and validate one record file."""
    with open(path, "rb") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not JSON ({exc})") from exc
    return _record_from_obj(obj)


# ----------------------------------------------------------------------
# bundled data and remote fetch


def list_bundled():
    base = resources.files("cartanforms").joinpath("data/eigenforms")
    return sorted(r.name[:-5] for r in base.iterdir()
                  if r.name.endswith(".json"))


def load_bundled(label):
    res = resources.files("cartanforms").joinpath(
        f"data/eigenforms/{label}.json")
    if not res.is_file():
        raise FetchError(f"no bundled record for label {label!r}")
    return _record_from_obj(json.loads(res.read_bytes()))


def _adapt_response(obj):
    """Map one remote response to the local schema (pinned format)."""
    if not isinstance(obj, dict):
        raise FetchError("response is not a JSON object")
    version = obj.get("format", RESPONSE_FORMAT)
    if version != RESPONSE_FORMAT:
        raise FetchError(f"unsupported response format {version!r}")
    out = {}
    for key in _REQUIRED:
        if key not in obj:
            raise FetchError(f"response missing {key!r}")
        out[key] = obj[key]
    for key in ("char_exponent", "embedding", "fricke"):
        if obj.get(key) is not None:
            out[key] = obj[key]
    return out


def _fetch_bytes(label, base_url):
    if base_url is None or base_url == "bundled:":
        res = resources.files("cartanforms").joinpath(
            f"data/eigenforms/{label}.json")
        if not res.is_file():
            raise FetchError(f"unknown label {label!r}")
        return res.read_bytes(), f"bundled:{label}"
    if base_url.startswith(("http://", "https://")):
        url = PATH_TEMPLATE.format(base=base_url.rstrip("/"), label=label)
        try:
            with urllib.request.urlopen(url) as resp:
                return resp.read(), url
        except urllib.error.URLError as exc:
            raise FetchError(f"cannot fetch {url}: {exc}") from exc
    path = PATH_TEMPLATE.format(base=base_url.rstrip("/"), label=label)
    try:
        with open(path, "rb") as fh:
            return fh.read(), path
    except OSError as exc:
        raise FetchError(f"cannot read {path}: {exc}") from exc


def fetch_remote(label, count, base_url=None, cache_dir=None):
    """Cached fetch of a labeled record with at least `count` terms.

    The cache (default $CARTANFORMS_CACHE or ~/.cache/cartanforms) is
    written atomically and served byte-identically on hits.  With no
    base_url the packaged files act as the remote, so everything works
    offline; http(s) URLs and plain directories are also accepted.
    """
    cache_dir = cache_dir or os.environ.get("CARTANFORMS_CACHE") \
        or os.path.join(os.path.expanduser("~"), ".cache", "cartanforms")
    cache_path = os.path.join(cache_dir, f"{label}.json")
    if os.path.exists(cache_path):
        rec = parse_eigenform_file(cache_path)
        if rec.precision >= count:
            return rec
    raw, origin = _fetch_bytes(label, base_url)
    try:
        obj = _adapt_response(json.loads(raw))
    except json.JSONDecodeError as exc:
        raise FetchError(f"unparseable response from {origin}") from exc
    if len(obj["an"]) < count:
        raise FetchError(f"{origin} has {len(obj['an'])} coefficients, "
                         f"need {count}")
    if origin.startswith(("http://", "https://")):
        obj["source"] = {"url": origin, "fetched": date.today().isoformat()}
    rec = _record_from_obj(obj)
    payload = (json.dumps(obj) + "\n").encode()
    os.makedirs(cache_dir, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=cache_dir, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, cache_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return rec


# ----------------------------------------------------------------------
# conjugation


def conjugate_coefficients(rec):
    """The record of the conjugate form, coefficients a_n bar.

    For a prime-level form with nontrivial nebentypus chi the classical
    relation a_n bar = chi(n)^(-1) a_n on (n, p) = 1 is verified exactly
    as a cross-check of the data against the declared character.
    """
    an = [galois_apply(rec.conj, a) for a in rec.an]
    ap = galois_apply(rec.conj, rec.ap) if rec.ap is not None else None
    char_exponent = rec.char_exponent
    if rec.char_order > 1 and _is_prime(rec.level):
        p = rec.level
        chi_inv = CharacterMu(p, rec.char_exponent).inverse()
        m = rec.tower.m
        for n in range(1, rec.precision + 1):
            if n % p == 0:
                continue
            if an[n - 1] != rec.an[n - 1] * rec.tower.embed(
                    chi_inv.value(n, m)):
                raise InvariantError(
                    "conjugate coefficients violate a_n bar = "
                    "chi(n)^(-1) a_n", index=n)
        char_exponent = (-rec.char_exponent) % (p - 1)
    out = EigenformRecord(
        label=rec.label, level=rec.level, char_order=rec.char_order,
        char_exponent=char_exponent, tower=rec.tower, an=an, ap=ap,
        conj=rec.conj, embedding=rec.embedding, fricke=rec.fricke,
        source=rec.source)
    return out.validate()


# ----------------------------------------------------------------------
# classification


class RepClassification:
    """Outcome of classify_representation.

    kind is "principal-series", "twisted-steinberg", or "cuspidal";
    partner names the level-p record for the first two; exponent fixes
    the character parameter (mu = gen^exponent on F_p^*, or theta =
    chi^exponent on the nonsplit torus, exponent in [1, (p+1)/2]);
    evidence records what was tried.
    """

    __slots__ = ("kind", "order", "exponent", "partner", "evidence")

    def __init__(self, kind, order, exponent, partner=None, evidence=None):
        self.kind = kind
        self.order = order
        self.exponent = exponent
        self.partner = partner
        self.evidence = evidence or {}

    def __repr__(self):
        tail = f", partner {self.partner}" if self.partner else ""
        return (f"RepClassification({self.kind}, order {self.order}, "
                f"exponent {self.exponent}{tail})")


def _cyclo_image(rec, cond_cache, n, L):
    """a_n(rec) as a CycloElt at conductor L via the declared embedding.

    Returns None when the record's field has an extension step but no
    embedding, in which case exact cross-field comparison is impossible.
    """
    x = rec.an[n - 1]
    if rec.tower.ext_degree == 1:
        return x.base_part().lift_conductor(L)
    if rec.embedding is None:
        return None
    key = (id(rec), L)
    if key not in cond_cache:
        cond, powers = rec.embedding
        cond_cache[key] = [z.lift_conductor(L) for z in powers]
    powers = cond_cache[key]
    out = CycloElt.zero(L)
    for c, zp in zip(x.coeffs, powers):
        out = out + zp * c.rational_value()
    return out


def _twist_matches(rec, h, mu, cache):
    """Does a_n(rec) = mu(n) a_n(h) hold exactly on all shared indices?

    Returns (True, None) or (False, first bad index).  Indices divisible
    by p must vanish on the level-p^2 side since the twisting character
    has conductor p.
    """
    p = h.level
    hm = h.tower.m
    L = math.lcm(rec.embedding[0] if rec.embedding else rec.tower.m,
                 h.embedding[0] if h.embedding else hm,
                 mu.conductor() if mu.conductor() > 1 else 1)
    n_max = min(rec.precision, h.precision)
    for n in range(1, n_max + 1):
        if n % p == 0:
            if not rec.an[n - 1].is_zero():
                return False, n
            continue
        lhs = _cyclo_image(rec, cache, n, L)
        rhs = _cyclo_image(h, cache, n, L)
        if lhs is None or rhs is None:
            return False, 0
        if lhs != rhs * mu.value(n, L):
            return False, n
    return True, None


def field_coords(rec, w):
    """Rewrite w (a CycloElt) as an element of K_f, or None.

    Pure cyclotomic fields use exact conductor rewriting; fields with an
    extension step go through the declared embedding (rational base
    only); without an embedding only rational values are accepted.
    """
    t = rec.tower
    if t.ext_degree == 1:
        L = math.lcm(w.m, t.m)
        try:
            return t.embed(rewrite_conductor(w.lift_conductor(L), t.m))
        except SubfieldMismatch:
            return None
    if rec.embedding is None:
        try:
            lo = rewrite_conductor(w, 1)
        except SubfieldMismatch:
            return None
        return t.rational(lo.rational_value())
    cond, powers = rec.embedding
    L = math.lcm(w.m, cond)
    basis = [z.lift_conductor(L).c for z in powers]
    sol = _solve_in_span(basis, w.lift_conductor(L).c)
    if sol is None:
        return None
    return TowerElt(t, [CycloElt.rational(t.m, s) for s in sol])


def _probe_tower(rec, p):
    """K_f with zeta_p adjoined, as a tower over Q(zeta_lcm(m, p))."""
    t = rec.tower
    base = math.lcm(t.m, p)
    if t.ext_degree == 1:
        return Tower(base)
    ext = [e.lift_conductor(base) for e in t.ext_poly]
    return Tower(base, ext)


def _descent_probe(rec, theta, nterms):
    """Run the multiplier descent for one theta candidate.

    Uses the smallest r in 1..p-1 whose multiplier family is nonzero.
    Returns ("pass", r), ("field", r) when some multiplier lies outside
    K_f, ("descent:n", r) with the first non-real coefficient index, or
    ("zero", None) when every r gives the zero vector.
    """
    p = theta.p
    mult, r = None, None
    for cand in range(1, p):
        fam = cusp_series_multipliers(theta, cand)
        # the model identifies e_0 with -sum e_r, so a constant family
        # is the zero invariant vector; only the differences matter
        if any(w != fam[0] for w in fam[1:]):
            mult, r = [w - fam[0] for w in fam], cand
            break
    if mult is None:
        return "zero", None
    coords = []
    for w in mult[1:]:
        lo = field_coords(rec, w)
        if lo is None:
            return "field", r
        coords.append(lo)
    tower = _probe_tower(rec, p)
    base = tower.m

    def lift(x):
        vec = [c.lift_conductor(base) for c in x.coeffs]
        return TowerElt(tower, vec)

    lifted = [lift(c) for c in coords]
    omega = []
    for s in range(p):
        acc = tower.zero()
        for k in range(1, p):
            if coords[k - 1].is_zero():
                continue
            acc = acc + lifted[k - 1] * tower.zeta(s * k * (base // p))
        omega.append(acc)
    nterms = min(nterms, rec.precision)
    coeffs = [lift(rec.an[n - 1]) * omega[n % p]
              for n in range(1, nterms + 1)]
    series = QSeries(p, tower, coeffs)
    gen = tower.gen() if tower.ext_poly else None
    try:
        out = series_descend_subfield(series, Subfield(p, real=True),
                                      actions=[GaloisAction(-1, gen)])
    except DescentFailure as exc:
        return f"descent:{exc.index}", r
    if out.is_zero():
        return "zero", r
    return "pass", r


def _real_cyclo_contains(t_small, t_big):
    """Q(zeta_t_small)^+ inside Q(zeta_t_big)^+, decided exactly."""
    L = math.lcm(t_small, t_big)
    eta = CycloElt.zeta_power(L, L // t_small) \
        + CycloElt.zeta_power(L, -(L // t_small) % L)
    try:
        rewrite_conductor(eta, t_big)
        return True
    except SubfieldMismatch:
        return False


def _require_real_field(rec):
    t = rec.tower
    if t.ext_degree > 1:
        if rec.conj.gen_image != t.gen():
            raise ValueError("classification needs a totally real "
                             "coefficient field")
    elif t.m > 2:
        raise ValueError("classification needs a totally real "
                         "coefficient field")


def classify_representation(rec, candidates):
    """Type the representation attached to a level-p^2 newform.

    Twist matching against the level-p `candidates` runs first; failing
    that, theta candidates on the nonsplit torus are screened by the
    Fricke eigenvalue when the record carries one (theta odd for +1,
    even for -1), then by exact descent of their multiplier series into
    K_f(zeta_p)^+.  When several theta survive, their real value fields
    always form a chain in the data seen so far, and the largest field
    wins; incomparable survivors raise AmbiguousClassification rather
    than picking silently.
    """
    if rec.char_order != 1:
        raise ValueError("only trivial-nebentypus forms are classified")
    p = math.isqrt(rec.level)
    if p * p != rec.level or not _is_prime(p):
        raise ValueError(f"level {rec.level} is not the square of a prime")
    _require_real_field(rec)
    evidence = {"fricke": rec.fricke, "twists": [], "thetas": []}
    cache = {}
    for h in candidates:
        if h.level != p:
            raise ValueError(f"candidate {h.label} has level {h.level}, "
                             f"expected {p}")
        x = h.char_exponent or 0
        if x % 2 != 0:
            evidence["twists"].append((h.label, None, "odd exponent"))
            continue
        for e_mu in (x // 2, x // 2 + (p - 1) // 2):
            e_mu %= p - 1
            if e_mu == 0:
                continue
            mu = CharacterMu(p, e_mu)
            ok, bad = _twist_matches(rec, h, mu, cache)
            if ok:
                kind = ("twisted-steinberg" if e_mu == (p - 1) // 2
                        else "principal-series")
                evidence["twists"].append((h.label, e_mu, "match"))
                return RepClassification(kind, mu.order, e_mu,
                                         partner=h.label, evidence=evidence)
            evidence["twists"].append((h.label, e_mu, f"mismatch:{bad}"))

    passers = []
    for d in sorted(n for n in range(1, (p + 1) // 2 + 1)
                    if (p + 1) % n == 0 and (p + 1) // n > 2):
        if rec.fricke == 1 and d % 2 == 0:
            continue
        if rec.fricke == -1 and d % 2 == 1:
            continue
        theta = CharacterTheta(p, d)
        outcome, r = _descent_probe(rec, theta, PROBE_TERMS)
        evidence["thetas"].append((theta.order, d, outcome, r))
        if outcome == "pass":
            passers.append((theta.order, d))
    if not passers:
        raise ClassificationError(
            f"{rec.label}: no torus character descends", evidence=evidence)
    passers.sort(key=lambda td: euler_phi(td[0]))
    for (t1, _), (t2, _) in zip(passers, passers[1:]):
        if euler_phi(t1) == euler_phi(t2) or not _real_cyclo_contains(t1, t2):
            raise AmbiguousClassification(
                f"{rec.label}: incomparable candidates "
                f"{[t for t, _ in passers]}", evidence=evidence)
    order, exponent = passers[-1]
    if rec.tower.degree() % max(1, euler_phi(order) // 2) != 0:
        raise ClassificationError(
            f"{rec.label}: field degree incompatible with theta order "
            f"{order}", evidence=evidence)
    evidence["chain"] = [t for t, _ in passers]
    return RepClassification("cuspidal", order, exponent, evidence=evidence)
