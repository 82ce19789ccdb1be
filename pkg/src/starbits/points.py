"""Point sets in [0,1)^d with exact dyadic coordinates.

A coordinate with precision p is k / 2**p for an integer 0 <= k < 2**p.
With p <= 52 every such value is exactly representable as a binary64
float, so coordinates are stored in a plain float array without any loss.

Bit streams map to points point-major, then coordinate-major, with the
most significant coordinate bit first: the first p bits of the stream are
coordinate 1 of point 1, read as sum(bit_i / 2**i).  This makes prefixes
compose: the first p*d*n bits of a stream always produce the same n
points no matter how many more are generated afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .drbg import BitStream
from .errors import PointFormatError

__all__ = [
    "PointSet",
    "bits_to_points",
    "round_to_precision",
    "save_points",
    "load_points",
]

MAX_PRECISION = 52


def _check_precision(p: int) -> None:
    if not 1 <= p <= MAX_PRECISION:
        raise ValueError(f"precision must be in 1..{MAX_PRECISION}, got {p}")


@dataclass(frozen=True)
class PointSet:
    """n points in [0,1)^d whose coordinates are exact p-bit dyadics."""

    coords: np.ndarray
    p: int
    provenance: dict[str, str] | None = field(default=None)

    def __post_init__(self):
        coords = np.ascontiguousarray(self.coords, dtype=np.float64)
        if coords.ndim != 2:
            raise ValueError(f"coords must be 2-D (n, d), got shape {coords.shape}")
        _check_precision(self.p)
        if coords.size:
            if coords.min() < 0.0 or coords.max() >= 1.0:
                raise ValueError("coordinates must lie in [0, 1)")
            scaled = np.ldexp(coords, self.p)
            if not np.array_equal(scaled, np.floor(scaled)):
                raise ValueError(
                    f"coordinates are not exact dyadics at precision p={self.p}"
                )
        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    def numerators(self) -> np.ndarray:
        """Integer k with coords == k / 2**p, as an (n, d) uint64 array."""
        return np.ldexp(self.coords, self.p).astype(np.uint64)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PointSet)
            and self.p == other.p
            and self.coords.shape == other.coords.shape
            and np.array_equal(self.coords, other.coords)
            and self.provenance == other.provenance
        )


def bits_to_points(stream: BitStream, d: int, n: int, p: int = MAX_PRECISION,
                   provenance: dict[str, str] | None = None) -> PointSet:
    """Interpret the first p*d*n bits of a stream as n points in [0,1)^d."""
    if d < 1 or n < 0:
        raise ValueError(f"need d >= 1 and n >= 0, got d={d}, n={n}")
    _check_precision(p)
    m = p * d * n
    if len(stream) < m:
        raise ValueError(
            f"stream too short: need {m} bits for n={n}, d={d}, p={p}, "
            f"have {len(stream)}"
        )
    bits = stream.bit_array()[:m].astype(np.uint64).reshape(n, d, p)
    weights = (np.uint64(1) << np.arange(p - 1, -1, -1, dtype=np.uint64))
    numerators = (bits * weights).sum(axis=2)
    coords = np.ldexp(numerators.astype(np.float64), -p)
    return PointSet(coords, p, provenance)


def round_to_precision(points, p: int) -> PointSet:
    """Map each coordinate x to floor(2**p * x) / 2**p.

    Accepts a PointSet or a raw array of values in [0,1).  The result
    moves each point by at most 2**-p in the max norm and is idempotent
    on coordinates that are already p-bit dyadics.
    """
    _check_precision(p)
    if isinstance(points, PointSet):
        provenance = points.provenance
        coords = points.coords
    else:
        provenance = None
        coords = np.ascontiguousarray(points, dtype=np.float64)
        if coords.ndim != 2:
            raise ValueError(f"expected an (n, d) array, got shape {coords.shape}")
    if coords.size and (coords.min() < 0.0 or coords.max() >= 1.0):
        raise ValueError("coordinates must lie in [0, 1)")
    # ldexp scales by a power of two exactly, so floor sees the true value.
    rounded = np.ldexp(np.floor(np.ldexp(coords, p)), -p)
    return PointSet(rounded, p, provenance)


# ---------------------------------------------------------------------------
# Serialization: plain text, bit-exact round trip
# ---------------------------------------------------------------------------
#
#   # d=2 N=3 p=52
#   # provenance: mechanism=ctr-drbg-256 seed_sha256=... offset_bits=0
#   2251799813685248 1125899906842624
#   ...
#
# Rows hold the integer numerators k (coordinate = k / 2**p).  A decimal
# form (one float per coordinate) is accepted on load and available on
# save for human consumption; floats are validated to be exact dyadics.

def save_points(ps: PointSet, destination, *, decimal: bool = False) -> None:
    """Write a point set; load_points(save_points(ps)) == ps bit-exactly."""
    lines = [f"# d={ps.d} N={ps.n} p={ps.p}"]
    if ps.provenance:
        tags = " ".join(f"{k}={v}" for k, v in sorted(ps.provenance.items()))
        lines.append(f"# provenance: {tags}")
    if decimal:
        for row in ps.coords:
            lines.append(" ".join(repr(float(x)) for x in row))
    else:
        for row in ps.numerators():
            lines.append(" ".join(str(int(k)) for k in row))
    text = "\n".join(lines) + "\n"
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="utf-8") as fh:
            fh.write(text)


def _parse_header(line: str, lineno: int) -> tuple[int, int, int]:
    fields = {}
    for token in line[1:].split():
        if "=" not in token:
            raise PointFormatError(f"bad header token {token!r}", lineno)
        key, _, value = token.partition("=")
        fields[key] = value
    try:
        return int(fields["d"]), int(fields["N"]), int(fields["p"])
    except (KeyError, ValueError):
        raise PointFormatError("header must declare d=, N= and p=", lineno) from None


def load_points(source) -> PointSet:
    """Read a point set written by save_points."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()

    shape = None
    provenance: dict[str, str] = {}
    rows: list[list[float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("provenance:"):
                for token in body[len("provenance:"):].split():
                    key, _, value = token.partition("=")
                    provenance[key] = value
            elif shape is None and "d=" in body:
                shape = _parse_header(line, lineno)
            continue
        if shape is None:
            raise PointFormatError("data row before '# d=.. N=.. p=..' header", lineno)
        d, n, p = shape
        tokens = line.split()
        if len(tokens) != d:
            raise PointFormatError(
                f"expected {d} coordinates, got {len(tokens)}", lineno
            )
        row = []
        for tok in tokens:
            if "." in tok or "e" in tok or "E" in tok:
                try:
                    x = float(tok)
                except ValueError:
                    raise PointFormatError(f"bad coordinate {tok!r}", lineno) from None
                if not 0.0 <= x < 1.0:
                    raise PointFormatError(
                        f"coordinate {tok} outside [0, 1)", lineno
                    )
                scaled = np.ldexp(x, p)
                if scaled != np.floor(scaled):
                    raise PointFormatError(
                        f"coordinate {tok} is not a dyadic at declared p={p}", lineno
                    )
            else:
                try:
                    k = int(tok)
                except ValueError:
                    raise PointFormatError(f"bad coordinate {tok!r}", lineno) from None
                if not 0 <= k < (1 << p):
                    raise PointFormatError(
                        f"numerator {k} outside [0, 2^{p})", lineno
                    )
                x = np.ldexp(float(k), -p)
            row.append(x)
        rows.append(row)

    if shape is None:
        raise PointFormatError("missing '# d=.. N=.. p=..' header")
    d, n, p = shape
    if len(rows) != n:
        raise PointFormatError(f"header declares N={n} but file has {len(rows)} rows")
    coords = np.array(rows, dtype=np.float64).reshape(len(rows), d)
    return PointSet(coords, p, provenance or None)
