"""Benchmark corpus: shipped toy-ISA programs, reference semantics and input generators."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from .isa import Program, parse_program

OUTPUT_BASE = 0x80


@dataclass(frozen=True)
class Benchmark:
    name: str
    # "int" programs take n in r0 only; "array" programs also read dp[0..n-1]
    kind: str
    min_n: int = 0

    def source(self) -> str:
        return resources.files("energybounds").joinpath(f"programs/{self.name}.toyisa").read_text()

    def program(self) -> Program:
        return parse_program(self.source())


CORPUS: dict[str, Benchmark] = {
    b.name: b
    for b in (
        Benchmark("fact", "int"),
        Benchmark("fib", "int"),
        Benchmark("reverse", "array"),
        Benchmark("findMax", "array", min_n=1),
        Benchmark("selectionSort", "array"),
        Benchmark("fir", "array"),
    )
}


def load(name_or_path: str) -> tuple[str, Program]:
    """Corpus name or path to a ``.toyisa`` file -> (display name, program)."""
    if name_or_path in CORPUS:
        return name_or_path, CORPUS[name_or_path].program()
    path = Path(name_or_path)
    if path.stem in CORPUS and not path.exists():
        return path.stem, CORPUS[path.stem].program()
    return path.stem, parse_program(path.read_text())


def is_array_program(name: str) -> bool:
    b = CORPUS.get(name)
    return b is not None and b.kind == "array"


# ------------------------------------------------------------ reference semantics


def _signed(x: int, w: int) -> int:
    return x - (1 << w) if x >> (w - 1) else x


def reference(name: str, n: int, data: list[int], word_bits: int = 32) -> tuple[int, list[int]]:
    """Expected (r0, data segment) after running corpus program ``name``."""
    mask = (1 << word_bits) - 1
    out = list(data)
    if name == "fact":
        r = 1
        for k in range(2, n + 1):
            r = r * k & mask
        return r, out
    if name == "fib":
        a, b = 0, 1
        for _ in range(n):
            a, b = b, (a + b) & mask
        return a, out
    if name == "reverse":
        for i in range(n):
            out[OUTPUT_BASE + n - 1 - i] = data[i]
        return n, out
    if name == "findMax":
        return max(data[:n], key=lambda v: _signed(v, word_bits)), out
    if name == "selectionSort":
        out[:n] = sorted(data[:n], key=lambda v: _signed(v, word_bits))
        return n, out
    if name == "fir":
        lim = _mkmsk_ref(10, word_bits)
        prev = 0
        for i in range(n):
            y = (3 * data[i] + 5 * prev) & mask
            if _signed(lim, word_bits) < _signed(y, word_bits):
                y = lim
            out[OUTPUT_BASE + i] = y
            prev = data[i]
        return n, out
    raise KeyError(name)


def _mkmsk_ref(k: int, w: int) -> int:
    return (1 << min(k, w)) - 1


# ------------------------------------------------------------ input generators

Generator = Callable[[int, np.random.Generator, int], list[int]]


def random_array(n: int, rng: np.random.Generator, bits: int = 32) -> list[int]:
    return [int(v) for v in rng.integers(0, 1 << bits, size=n, dtype=np.uint64)]


def ascending_array(n: int, rng: np.random.Generator, bits: int = 32) -> list[int]:
    """Strictly ascending non-negative values (below the sign bit) when room allows."""
    hi = 1 << (bits - 1)
    if n <= hi:
        vals = np.sort(rng.choice(hi, size=n, replace=False))
    else:
        vals = np.sort(rng.integers(0, hi, size=n))
    return [int(v) for v in vals]


def descending_array(n: int, rng: np.random.Generator, bits: int = 32) -> list[int]:
    return ascending_array(n, rng, bits)[::-1]


def program_inputs(name: str, n: int, array: list[int] | None = None) -> tuple[list[int], list[int] | None]:
    """Register arguments and memory image for one run of a corpus program."""
    if is_array_program(name):
        return [n], list(array or [])
    return [n], None


# findMax worst/best inputs: every element is a new maximum versus none is
WORST_CASE: dict[str, Generator] = {"findMax": ascending_array}
BEST_CASE: dict[str, Generator] = {"findMax": descending_array}
