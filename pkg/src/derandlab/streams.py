"""Deterministic bit streams and identifier-indexed randomness assignments.

Streams are unbounded in principle and realized lazily; a per-run safety cap
(enforced by readers) turns runaway consumption into an error instead of a
hang.  Everything replays exactly from its construction parameters.
"""

from __future__ import annotations

import hashlib
import itertools
from typing import Callable, Iterator, Mapping, Sequence

DEFAULT_BIT_CAP = 1 << 20


class StreamExhausted(RuntimeError):
    """A recorded stream was read past its last bit."""


class BitBudgetExceeded(RuntimeError):
    """A reader hit its per-run safety cap."""


class UnassignedIdentifier(LookupError):
    """An assignment was asked for an identifier outside its domain."""


class BitStream:
    """An indexable sequence of bits: ``bit(i)`` is bit number ``i``.

    Construct with :meth:`keyed` (hash-derived, unbounded), :meth:`from_prefix`
    (finite prefix padded with a constant), or :meth:`from_bits` (recorded
    exactly; reading past the end raises :class:`StreamExhausted`).
    """

    def __init__(self, getter: Callable[[int], int], description: str):
        self._getter = getter
        self.description = description

    def bit(self, i: int) -> int:
        if i < 0:
            raise IndexError("negative bit index")
        return self._getter(i)

    def __repr__(self) -> str:
        return f"BitStream({self.description})"

    @classmethod
    def keyed(cls, *key_parts: object) -> "BitStream":
        """Unbounded stream derived from a hash of the key parts.

        Distinct keys give computationally unrelated streams, which is how
        per-identifier independence is realized.
        """
        key = "|".join(str(p) for p in key_parts)
        blocks: dict[int, bytes] = {}

        def getter(i: int) -> int:
            block_index, offset = divmod(i, 256)
            block = blocks.get(block_index)
            if block is None:
                block = hashlib.sha256(f"{key}#{block_index}".encode()).digest()
                blocks[block_index] = block
            return block[offset // 8] >> (7 - offset % 8) & 1

        return cls(getter, f"keyed:{key}")

    @classmethod
    def from_seed(cls, seed: object, identifier: int) -> "BitStream":
        return cls.keyed(seed, identifier)

    @classmethod
    def from_prefix(cls, bits: Sequence[int], pad: int = 0) -> "BitStream":
        prefix = _as_bits(bits)
        if pad not in (0, 1):
            raise ValueError("pad bit must be 0 or 1")

        def getter(i: int) -> int:
            return prefix[i] if i < len(prefix) else pad

        return cls(getter, f"prefix:{''.join(map(str, prefix))}+{pad}...")

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "BitStream":
        recorded = _as_bits(bits)

        def getter(i: int) -> int:
            if i >= len(recorded):
                raise StreamExhausted(
                    f"bit budget exceeded: recorded stream holds {len(recorded)} bits"
                )
            return recorded[i]

        return cls(getter, f"recorded:{''.join(map(str, recorded))}")


def _as_bits(bits: Sequence[int]) -> tuple[int, ...]:
    out = tuple(int(b) for b in bits)
    if any(b not in (0, 1) for b in out):
        raise ValueError("bits must be 0 or 1")
    return out


class BitReader:
    """Sequential cursor over a stream with a consumption cap.

    ``position`` is the absolute index of the next bit; a run that resumes a
    reader at a later start keeps the cap meaningful because the cap bounds
    the absolute position reached.
    """

    def __init__(self, stream: BitStream, cap: int = DEFAULT_BIT_CAP, start: int = 0):
        self.stream = stream
        self.cap = cap
        self.position = start

    def next_bit(self) -> int:
        if self.position >= self.cap:
            raise BitBudgetExceeded(
                f"per-run bit cap of {self.cap} reached on {self.stream!r}"
            )
        bit = self.stream.bit(self.position)
        self.position += 1
        return bit

    def take(self, k: int) -> list[int]:
        return [self.next_bit() for _ in range(k)]


class RandomAssignment:
    """A total map from identifiers to bit streams.

    ``domain=None`` means total on all identifiers (seed-derived assignments).
    Bounded assignments built from explicit vectors remember them for
    serialization and raise once a run reads past the recorded bits.
    """

    def __init__(
        self,
        stream_for: Callable[[int], BitStream],
        domain: frozenset[int] | None = None,
        description: str = "",
        vectors: Mapping[int, tuple[int, ...]] | None = None,
    ):
        self._stream_for = stream_for
        self.domain = domain
        self.description = description
        self.vectors = dict(vectors) if vectors is not None else None

    def stream_for(self, identifier: int) -> BitStream:
        if self.domain is not None and identifier not in self.domain:
            raise UnassignedIdentifier(
                f"identifier {identifier} outside assignment domain"
            )
        return self._stream_for(identifier)

    def __repr__(self) -> str:
        return f"RandomAssignment({self.description})"

    @classmethod
    def from_seed(cls, seed: object, domain: Sequence[int] | None = None) -> "RandomAssignment":
        dom = frozenset(domain) if domain is not None else None
        return cls(
            lambda ident: BitStream.keyed(seed, ident),
            dom,
            f"seed:{seed}",
        )

    @classmethod
    def from_vectors(cls, vectors: Mapping[int, Sequence[int]]) -> "RandomAssignment":
        fixed = {int(k): _as_bits(v) for k, v in vectors.items()}
        streams = {k: BitStream.from_bits(v) for k, v in fixed.items()}
        desc = ",".join(f"{k}:{''.join(map(str, v))}" for k, v in sorted(fixed.items()))
        return cls(streams.__getitem__, frozenset(fixed), desc, vectors=fixed)

    @classmethod
    def from_streams(cls, streams: Mapping[int, BitStream]) -> "RandomAssignment":
        fixed = dict(streams)
        return cls(fixed.__getitem__, frozenset(fixed), "explicit-streams")


def assignment_space_size(id_space: Sequence[int], bits: int) -> int:
    return (2**bits) ** len(set(id_space))


def iter_bounded_assignments(
    id_space: Sequence[int], bits: int
) -> Iterator[RandomAssignment]:
    """All assignments of ``bits``-bit vectors to the identifiers, in
    lexicographic order (identifiers ascending, vector bits most significant
    first, 0 before 1)."""
    if bits < 0:
        raise ValueError("bit budget must be nonnegative")
    idents = sorted(set(id_space))
    for flat in itertools.product((0, 1), repeat=bits * len(idents)):
        yield RandomAssignment.from_vectors(
            {
                ident: flat[i * bits : (i + 1) * bits]
                for i, ident in enumerate(idents)
            }
        )
