"""Bit-level I/O, the per-frame container and fixed-rate truncation control.

Frame layout (MSB first, zero-padded to a byte)::

    payload_bits   16
    coder id        3
    last step       4
    [allocation    33]    only if last step > 0 and the stream is perceptual
    [ordering  5*k + 5]   only if last step > 0 and the coder orders rows
    payload        payload_bits

Stream file: ``b"AVDZ"``, version, sample rate, frame size, then the
extension fields listed in :class:`StreamInfo`, then the frames.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace

import numpy as np

from .pquant import SIDE_INFO_BITS, BitAllocation, decode_alloc_side_info, encode_alloc_side_info

MAGIC = b"AVDZ"
VERSION = 1
FRAME_SECONDS = 0.032
LENGTH_BITS = 16
CODER_BITS = 3
LEVEL_BITS = 4
INDEX_BITS = 5

CODER_IDS = {
    "ezw": 0,
    "mezw": 1,
    "spiht": 2,
    "spiht-ordered": 3,
    "spiht-modo": 4,
    "mspiht": 5,
    "avdz": 6,
}
CODER_NAMES = {v: k for k, v in CODER_IDS.items()}
ORDERED_CODERS = frozenset(c for c in CODER_IDS if c not in ("ezw", "spiht"))
MAX_HEADER_BITS = LENGTH_BITS + CODER_BITS + LEVEL_BITS + SIDE_INFO_BITS + INDEX_BITS * 27


class EndOfStream(Exception):
    """Raised by :class:`BitReader` when a read runs past the available bits."""


class FramingError(ValueError):
    def __init__(self, message: str, frame_index: int | None = None):
        if frame_index is not None:
            message = f"frame {frame_index}: {message}"
        super().__init__(message)
        self.frame_index = frame_index


class BitWriter:
    def __init__(self):
        self.bits: list[int] = []

    def __len__(self) -> int:
        return len(self.bits)

    def bit(self, b) -> None:
        self.bits.append(1 if b else 0)

    def put_bits(self, value: int, width: int) -> None:
        if not 0 <= width <= 32:
            raise ValueError(f"width {width} outside 0..32")
        if value < 0 or value >> width:
            raise ValueError(f"value {value} does not fit in {width} bits")
        for shift in range(width - 1, -1, -1):
            self.bits.append((value >> shift) & 1)

    def extend(self, bits) -> None:
        self.bits.extend(int(b) for b in bits)

    def to_bytes(self) -> bytes:
        return pack_bits(self.bits)


class BitReader:
    def __init__(self, bits, start: int = 0, stop: int | None = None):
        self.bits = bits
        self.pos = start
        self.stop = len(bits) if stop is None else min(stop, len(bits))

    @classmethod
    def from_bytes(cls, data: bytes) -> "BitReader":
        return cls(unpack_bits(data))

    @property
    def remaining(self) -> int:
        return self.stop - self.pos

    def bit(self) -> int:
        if self.pos >= self.stop:
            raise EndOfStream
        b = self.bits[self.pos]
        self.pos += 1
        return b

    def get_bits(self, width: int) -> int:
        if not 0 <= width <= 32:
            raise ValueError(f"width {width} outside 0..32")
        if self.pos + width > self.stop:
            raise EndOfStream
        v = 0
        for b in self.bits[self.pos:self.pos + width]:
            v = (v << 1) | b
        self.pos += width
        return v


def pack_bits(bits) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes() if len(bits) else b""


def unpack_bits(data: bytes) -> list[int]:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8)).tolist()


@dataclass
class FrameHeader:
    coder: str
    last_step_level: int
    alloc: BitAllocation | None = None
    ordering: tuple[int, ...] = ()

    def write(self, w: BitWriter, perceptual: bool = True) -> None:
        w.put_bits(CODER_IDS[self.coder], CODER_BITS)
        w.put_bits(self.last_step_level, LEVEL_BITS)
        if self.last_step_level == 0:
            return
        if perceptual:
            w.extend(encode_alloc_side_info(self.alloc))
        if self.coder in ORDERED_CODERS:
            for leaf in self.ordering:
                w.put_bits(leaf, INDEX_BITS)
            w.put_bits(0, INDEX_BITS)

    @classmethod
    def read(cls, r: BitReader, perceptual: bool = True) -> "FrameHeader":
        coder_id = r.get_bits(CODER_BITS)
        if coder_id not in CODER_NAMES:
            raise FramingError(f"unknown coder id {coder_id}")
        coder = CODER_NAMES[coder_id]
        level = r.get_bits(LEVEL_BITS)
        alloc = None
        ordering: list[int] = []
        if level:
            if perceptual:
                alloc = decode_alloc_side_info([r.bit() for _ in range(SIDE_INFO_BITS)])
            if coder in ORDERED_CODERS:
                while (leaf := r.get_bits(INDEX_BITS)) != 0:
                    ordering.append(leaf)
                    if len(ordering) > 26:
                        raise FramingError("ordering side info lacks its terminator")
        return cls(coder, level, alloc, tuple(ordering))

    def bit_length(self, perceptual: bool = True) -> int:
        w = BitWriter()
        self.write(w, perceptual)
        return len(w)


@dataclass
class FrameStream:
    header: FrameHeader
    payload: list[int] = field(default_factory=list)

    @property
    def payload_bit_count(self) -> int:
        return len(self.payload)

    def content_bits(self, perceptual: bool = True) -> int:
        return LENGTH_BITS + self.header.bit_length(perceptual) + len(self.payload)

    def packed_bits(self, perceptual: bool = True) -> int:
        return -(-self.content_bits(perceptual) // 8) * 8


def pack_frame(frame: FrameStream, perceptual: bool = True) -> bytes:
    if len(frame.payload) >= 1 << LENGTH_BITS:
        raise FramingError(f"payload of {len(frame.payload)} bits exceeds the length field")
    w = BitWriter()
    w.put_bits(len(frame.payload), LENGTH_BITS)
    frame.header.write(w, perceptual)
    w.extend(frame.payload)
    return w.to_bytes()


def unpack_frame(data: bytes, offset: int = 0, perceptual: bool = True,
                 index: int | None = None) -> tuple[FrameStream, int]:
    """Decode one frame starting at byte ``offset``; returns it and the next offset."""
    bits = unpack_bits(data[offset:offset + 4096])
    r = BitReader(bits)
    try:
        n_payload = r.get_bits(LENGTH_BITS)
        header = FrameHeader.read(r, perceptual)
        head = r.pos
        total = head + n_payload
        if total > len(bits):
            bits = unpack_bits(data[offset:offset + -(-total // 8)])
        if total > len(bits):
            raise EndOfStream
    except EndOfStream:
        raise FramingError("frame truncated", index) from None
    except (FramingError, ValueError) as exc:
        raise FramingError(str(exc), index) from None
    return FrameStream(header, bits[head:total]), offset + -(-total // 8)


@dataclass(frozen=True)
class StreamInfo:
    sample_rate: int = 16000
    frame_size: int = 512
    kernel_order: int = 8
    beta: float = 0.168
    perceptual: bool = True
    pad: int = 0
    n_frames: int = 0

    _FMT = ">4sBHHBHBHI"

    def to_bytes(self) -> bytes:
        return struct.pack(self._FMT, MAGIC, VERSION, self.sample_rate, self.frame_size,
                           self.kernel_order, round(self.beta * 10000),
                           0 if self.perceptual else 1, self.pad, self.n_frames)

    @classmethod
    def size(cls) -> int:
        return struct.calcsize(cls._FMT)

    @classmethod
    def from_bytes(cls, data: bytes) -> "StreamInfo":
        if len(data) < cls.size():
            raise FramingError("stream header truncated")
        magic, version, sr, fs, order, beta, mode, pad, n = struct.unpack_from(cls._FMT, data)
        if magic != MAGIC:
            raise FramingError(f"bad magic {magic!r}")
        if version != VERSION:
            raise FramingError(f"unsupported stream version {version}")
        return cls(sr, fs, order, beta / 10000, mode == 0, pad, n)


def write_stream(info: StreamInfo, frames: list[FrameStream]) -> bytes:
    info = replace(info, n_frames=len(frames))
    return info.to_bytes() + b"".join(pack_frame(f, info.perceptual) for f in frames)


def read_stream(data: bytes) -> tuple[StreamInfo, list[FrameStream]]:
    info = StreamInfo.from_bytes(data)
    offset = StreamInfo.size()
    frames = []
    for i in range(info.n_frames):
        frame, offset = unpack_frame(data, offset, info.perceptual, index=i)
        frames.append(frame)
    return info, frames


@dataclass
class RateBudget:
    """Per-frame bit budget for a fixed target rate, with a one-frame carry."""

    target_bps: float
    frame_seconds: float = FRAME_SECONDS

    @property
    def frame_bits(self) -> int:
        return round(self.target_bps * self.frame_seconds)


def truncate_to_budget(frame: FrameStream, budget: int, carry: int = 0,
                       perceptual: bool = True, stuff: bool = True) -> tuple[FrameStream, int]:
    """Cut the payload so the packed frame spends ``budget + carry`` bits.

    The header and length prefix are never cut. Unused bits carry over to the
    next frame up to one frame budget; with ``stuff=True`` any excess beyond
    that cap is filled with zero bits after the payload (decoders stop once
    all levels are coded and ignore the rest), keeping the channel rate fixed.
    """
    if budget < MAX_HEADER_BITS:
        raise ValueError(f"budget of {budget} bits is below the {MAX_HEADER_BITS}-bit header bound")
    overhead = LENGTH_BITS + frame.header.bit_length(perceptual)
    room = budget + carry - overhead
    room -= (overhead + room) % 8 if room > 0 else 0
    payload = frame.payload[:max(0, room)]
    out = FrameStream(frame.header, list(payload))
    spent = out.packed_bits(perceptual)
    if stuff and spent < carry:
        out.payload.extend([0] * (carry - out.content_bits(perceptual)))
        spent = out.packed_bits(perceptual)
    return out, min(budget + carry - spent, budget)
