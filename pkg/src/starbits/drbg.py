"""Seedable deterministic bit generation.

The default mechanism is an AES-256 counter-mode DRBG (the standardized
construction with a block-cipher derivation function) declared at 256 bits
of security.  It consumes a 384-bit seed: the first 256 bits are treated as
the entropy input and the trailing 128 bits as the nonce.  A deliberately
weak ``test-counter`` mechanism is included so harness tests can show what
a bad generator does to point-set uniformity; it must never be used for
anything but that.

Generators expose one bit stream each.  ``generate_bits`` is buffered so
that the stream is a pure function of (mechanism, seed): asking for m bits
and then m' bits yields exactly the same bits as asking for m + m' at once.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .errors import EntropyUnavailableError, ReseedRequiredError

__all__ = [
    "Seed",
    "BitStream",
    "Generator",
    "seed_from_entropy",
    "instantiate",
    "available_mechanisms",
    "load_kat_vectors",
    "run_known_answer_tests",
]


@dataclass(frozen=True)
class Seed:
    """A binary word used to key a generator."""

    data: bytes

    def __post_init__(self):
        if len(self.data) == 0:
            raise ValueError("seed must not be empty")

    @property
    def n_bits(self) -> int:
        return 8 * len(self.data)

    @classmethod
    def from_hex(cls, text: str) -> "Seed":
        try:
            return cls(bytes.fromhex(text.strip()))
        except ValueError as exc:
            raise ValueError(f"seed is not valid hex: {exc}") from exc

    def hex(self) -> str:
        return self.data.hex()


def seed_from_entropy(n_bits: int) -> Seed:
    """Draw an n_bits seed from the operating system entropy facility.

    n_bits must be a multiple of 8 and at least 128.
    """
    if n_bits % 8 != 0:
        raise ValueError(f"seed length must be a multiple of 8 bits, got {n_bits}")
    if n_bits < 128:
        raise ValueError(f"seed length must be at least 128 bits, got {n_bits}")
    try:
        raw = os.urandom(n_bits // 8)
    except NotImplementedError as exc:
        raise EntropyUnavailableError(
            "no OS entropy source is available; supply an explicit seed instead"
        ) from exc
    return Seed(raw)


class BitStream:
    """An immutable, finite, ordered sequence of bits.

    Stored as packed bytes, most-significant bit first within each byte;
    padding bits beyond ``nbits`` are zero.
    """

    __slots__ = ("data", "nbits")

    def __init__(self, data: bytes, nbits: int):
        if nbits < 0:
            raise ValueError("bit count must be nonnegative")
        if len(data) != (nbits + 7) // 8:
            raise ValueError(
                f"{nbits} bits need {(nbits + 7) // 8} bytes, got {len(data)}"
            )
        if nbits % 8:
            # Zero padding is part of the canonical representation.
            if data[-1] & ((1 << (8 - nbits % 8)) - 1):
                raise ValueError("padding bits past the stream length must be zero")
        object.__setattr__(self, "data", bytes(data))
        object.__setattr__(self, "nbits", nbits)

    def __setattr__(self, *args):
        raise AttributeError("BitStream is immutable")

    @classmethod
    def from_bits(cls, bits) -> "BitStream":
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.ndim != 1:
            raise ValueError("expected a flat bit array")
        return cls(np.packbits(arr).tobytes(), int(arr.size))

    def bit_array(self) -> np.ndarray:
        """The bits as a numpy uint8 array of zeros and ones."""
        return np.unpackbits(np.frombuffer(self.data, dtype=np.uint8))[: self.nbits]

    def __len__(self) -> int:
        return self.nbits

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitStream)
            and self.nbits == other.nbits
            and self.data == other.data
        )

    def __hash__(self) -> int:
        return hash((self.data, self.nbits))

    def __repr__(self) -> str:
        return f"BitStream(nbits={self.nbits})"


# ---------------------------------------------------------------------------
# AES-256 CTR DRBG mechanism (standardized counter-mode construction)
# ---------------------------------------------------------------------------

_DF_KEY = bytes(range(32))  # fixed key of the block-cipher derivation function


def _aes_ecb(key: bytes):
    return Cipher(algorithms.AES(key), modes.ECB()).encryptor()


class AesCtrDrbg:
    """Raw AES-256 counter-mode DRBG state machine.

    Implements instantiate / reseed / generate with and without the
    derivation function.  ``generate`` returns the raw per-request output,
    which is what published known-answer vectors check.  Stream users
    should go through :class:`Generator`, which adds buffering.
    """

    OUTLEN = 16
    KEYLEN = 32
    SEEDLEN = OUTLEN + KEYLEN
    RESEED_INTERVAL = 1 << 48
    MAX_REQUEST_BYTES = 1 << 16  # 2**19 bits per generate request

    def __init__(
        self,
        entropy: bytes,
        nonce: bytes = b"",
        personalization: bytes = b"",
        *,
        use_df: bool = True,
    ):
        self.use_df = use_df
        if use_df:
            if len(entropy) < self.KEYLEN:
                raise ValueError(
                    f"entropy input must be at least {self.KEYLEN} bytes, got {len(entropy)}"
                )
            seed_material = self._df(entropy + nonce + personalization, self.SEEDLEN)
        else:
            if nonce:
                raise ValueError("the no-df profile takes no nonce")
            if len(entropy) != self.SEEDLEN:
                raise ValueError(
                    f"without df the entropy input must be exactly {self.SEEDLEN} bytes"
                )
            seed_material = self._xor_pad(entropy, personalization)
        self._key = bytes(self.KEYLEN)
        self._v = bytes(self.OUTLEN)
        self._update(seed_material)
        self.reseed_counter = 1

    # -- internals ---------------------------------------------------------

    @classmethod
    def _xor_pad(cls, base: bytes, extra: bytes) -> bytes:
        if len(extra) > cls.SEEDLEN:
            raise ValueError("personalization/additional input longer than seedlen")
        extra = extra + bytes(cls.SEEDLEN - len(extra))
        return bytes(a ^ b for a, b in zip(base, extra))

    def _blocks(self, nbytes: int) -> bytes:
        enc = _aes_ecb(self._key)
        v = int.from_bytes(self._v, "big")
        out = bytearray()
        while len(out) < nbytes:
            v = (v + 1) % (1 << 128)
            out += enc.update(v.to_bytes(16, "big"))
        self._v = v.to_bytes(16, "big")
        return bytes(out[:nbytes])

    def _update(self, provided: bytes) -> None:
        temp = self._blocks(self.SEEDLEN)
        temp = bytes(a ^ b for a, b in zip(temp, provided))
        self._key = temp[: self.KEYLEN]
        self._v = temp[self.KEYLEN :]

    @classmethod
    def _bcc(cls, key: bytes, data: bytes) -> bytes:
        enc = _aes_ecb(key)
        chain = bytes(cls.OUTLEN)
        for i in range(0, len(data), cls.OUTLEN):
            block = bytes(a ^ b for a, b in zip(chain, data[i : i + cls.OUTLEN]))
            chain = enc.update(block)
        return chain

    @classmethod
    def _df(cls, input_string: bytes, nbytes: int) -> bytes:
        s = (
            len(input_string).to_bytes(4, "big")
            + nbytes.to_bytes(4, "big")
            + input_string
            + b"\x80"
        )
        s += bytes(-len(s) % cls.OUTLEN)
        temp = bytearray()
        i = 0
        while len(temp) < cls.SEEDLEN:
            iv = i.to_bytes(4, "big") + bytes(cls.OUTLEN - 4)
            temp += cls._bcc(_DF_KEY, iv + s)
            i += 1
        key, x = bytes(temp[: cls.KEYLEN]), bytes(temp[cls.KEYLEN : cls.SEEDLEN])
        enc = _aes_ecb(key)
        out = bytearray()
        while len(out) < nbytes:
            x = enc.update(x)
            out += x
        return bytes(out[:nbytes])

    # -- public mechanism API ----------------------------------------------

    def reseed(self, entropy: bytes, additional: bytes = b"") -> None:
        if self.use_df:
            seed_material = self._df(entropy + additional, self.SEEDLEN)
        else:
            if len(entropy) != self.SEEDLEN:
                raise ValueError(
                    f"without df the reseed entropy must be exactly {self.SEEDLEN} bytes"
                )
            seed_material = self._xor_pad(entropy, additional)
        self._update(seed_material)
        self.reseed_counter = 1

    def generate(self, nbytes: int, additional: bytes = b"") -> bytes:
        if not 1 <= nbytes <= self.MAX_REQUEST_BYTES:
            raise ValueError(
                f"request must be between 1 and {self.MAX_REQUEST_BYTES} bytes"
            )
        if self.reseed_counter > self.RESEED_INTERVAL:
            raise ReseedRequiredError(
                "generate-request limit reached; reseed the generator"
            )
        if additional:
            additional = (
                self._df(additional, self.SEEDLEN)
                if self.use_df
                else self._xor_pad(bytes(self.SEEDLEN), additional)
            )
            self._update(additional)
        else:
            additional = bytes(self.SEEDLEN)
        out = self._blocks(nbytes)
        self._update(additional)
        self.reseed_counter += 1
        return out


class _CounterBlocks:
    """Trivially weak block source: consecutive big-endian counter values.

    Exists only so tests and demos can show the harness flagging a bad
    generator.  Zero bits of security by construction.
    """

    def __init__(self, seed_data: bytes):
        self._counter = int.from_bytes(seed_data, "big") % (1 << 128)

    def generate(self, nbytes: int) -> bytes:
        out = bytearray()
        while len(out) < nbytes:
            out += self._counter.to_bytes(16, "big")
            self._counter = (self._counter + 1) % (1 << 128)
        return bytes(out[:nbytes])


# ---------------------------------------------------------------------------
# Stream-level generator wrapper
# ---------------------------------------------------------------------------

_CHUNK_BYTES = 4096  # raw pull size; fixed so the stream is request-pattern free


class Generator:
    """A single-consumer bit stream over a raw block mechanism.

    The stream is defined as the concatenation of fixed-size raw outputs,
    so the bits returned depend only on (mechanism, seed) and the total
    number of bits consumed so far, never on how requests were split up.
    """

    def __init__(self, mechanism_id: str, security_bits: int, source, seed: Seed):
        self.mechanism_id = mechanism_id
        self.security_bits = security_bits
        self.seed_n_bits = seed.n_bits
        self._source = source
        self._buf = bytearray()
        self._bitpos = 0
        self.bits_consumed = 0

    def generate_bits(self, m: int) -> BitStream:
        """Return the next m bits of the stream."""
        if m < 1:
            raise ValueError(f"bit count must be positive, got {m}")
        while 8 * len(self._buf) - self._bitpos < m:
            self._buf += self._source.generate(_CHUNK_BYTES)
        start_byte = self._bitpos // 8
        end_byte = (self._bitpos + m + 7) // 8
        window = np.frombuffer(bytes(self._buf[start_byte:end_byte]), dtype=np.uint8)
        offset = self._bitpos % 8
        bits = np.unpackbits(window)[offset : offset + m]
        self._bitpos += m
        self.bits_consumed += m
        # Drop whole consumed bytes so the buffer stays small.
        drop = self._bitpos // 8
        if drop:
            del self._buf[:drop]
            self._bitpos -= 8 * drop
        return BitStream.from_bits(bits)


_SEED_BITS_CTR = 384


def _make_ctr_drbg(seed: Seed) -> AesCtrDrbg:
    # Profile: derivation function on, empty personalization string,
    # 384-bit seed split as 256-bit entropy input + 128-bit nonce.
    return AesCtrDrbg(seed.data[:32], seed.data[32:48], use_df=True)


_MECHANISMS = {
    "ctr-drbg-256": (_make_ctr_drbg, _SEED_BITS_CTR, 256),
    "test-counter": (_CounterBlocks, None, 0),
}


def available_mechanisms() -> list[str]:
    return sorted(_MECHANISMS)


def instantiate(mechanism_id: str, seed: Seed) -> Generator:
    """Build a Generator for the given mechanism and seed.

    ``ctr-drbg-256`` requires a 384-bit seed and declares 256 bits of
    security; ``test-counter`` accepts any seed and declares zero.
    """
    try:
        factory, seed_bits, security = _MECHANISMS[mechanism_id]
    except KeyError:
        raise ValueError(
            f"unknown mechanism {mechanism_id!r}; available: {', '.join(available_mechanisms())}"
        ) from None
    if seed_bits is not None and seed.n_bits != seed_bits:
        raise ValueError(
            f"{mechanism_id} needs a {seed_bits}-bit seed, got {seed.n_bits} bits"
        )
    if mechanism_id == "test-counter":
        source = factory(seed.data)
    else:
        source = factory(seed)
    return Generator(mechanism_id, security, source, seed)


# ---------------------------------------------------------------------------
# Known-answer vectors
# ---------------------------------------------------------------------------

def load_kat_vectors(path=None) -> list[tuple[bytes, bytes]]:
    """Read (seed, expected) pairs from a fixture file.

    Format: one vector per line, ``seed_hex expected_hex``; ``#`` lines and
    blank lines are ignored.  The bundled file holds published validation
    vectors for the AES-256 counter-mode mechanism.
    """
    if path is None:
        text = (
            resources.files("starbits").joinpath("kat/ctr_drbg_aes256.txt").read_text()
        )
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    vectors = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'seed_hex expected_hex'")
        vectors.append((bytes.fromhex(parts[0]), bytes.fromhex(parts[1])))
    return vectors


def run_known_answer_tests(path=None) -> int:
    """Check the default mechanism against its known-answer vectors.

    Protocol per vector: instantiate with entropy = seed[:32] and
    nonce = seed[32:48], generate len(expected) bytes twice, and compare
    the second output.  Returns the number of vectors checked; raises
    ``ValueError`` on the first mismatch.
    """
    vectors = load_kat_vectors(path)
    for i, (seed, expected) in enumerate(vectors):
        if len(seed) != 48:
            raise ValueError(f"vector {i}: seed must be 48 bytes")
        drbg = AesCtrDrbg(seed[:32], seed[32:48], use_df=True)
        drbg.generate(len(expected))
        got = drbg.generate(len(expected))
        if got != expected:
            raise ValueError(
                f"known-answer vector {i} failed: got {got.hex()}, want {expected.hex()}"
            )
    return len(vectors)
