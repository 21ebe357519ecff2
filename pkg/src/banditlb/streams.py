"""Uniform randomization streams and seed derivation.

Every run consumes two independent substreams of one seeded generator:
child 0 feeds reward sampling, child 1 feeds the strategy's randomization.
Seeds for run ``i`` of a Monte Carlo batch are derived by the splittable
scheme SeedSequence((base_seed, i)), so runs can execute in any order (or
in parallel) without sharing stream state.
"""

from numpy.random import PCG64, Generator, SeedSequence

__all__ = [
    "UniformStream",
    "DiscreteStream",
    "run_seed_sequence",
    "derive_run_entropy",
    "split_run_streams",
]


def run_seed_sequence(seed) -> SeedSequence:
    """SeedSequence for one run.  ``seed`` is an int or a tuple of ints."""
    if isinstance(seed, SeedSequence):
        return seed
    return SeedSequence(seed)


def derive_run_entropy(base_seed: int, run_index: int) -> tuple:
    """Entropy tuple for an individual Monte Carlo run."""
    return (int(base_seed), int(run_index))


def split_run_streams(seed):
    """(reward bit generator, strategy bit generator) for one run."""
    children = run_seed_sequence(seed).spawn(2)
    return PCG64(children[0]), PCG64(children[1])


class UniformStream:
    """Buffered stream of uniforms on [0, 1) drawn from a PCG64 generator.

    Buffering does not change the stream: draws come out in generator
    order, exactly matching one next_double call per draw.
    """

    __slots__ = ("_gen", "_buf", "_idx", "position")

    _BLOCK = 4096

    def __init__(self, bitgen):
        self._gen = Generator(bitgen)
        self._buf = self._gen.random(self._BLOCK)
        self._idx = 0
        self.position = 0

    def draw(self) -> float:
        if self._idx >= len(self._buf):
            self._buf = self._gen.random(self._BLOCK)
            self._idx = 0
        u = self._buf[self._idx]
        self._idx += 1
        self.position += 1
        return float(u)


class DiscreteStream:
    """Replay stream over a finite alphabet of R equiprobable symbols.

    Symbol j is presented to the consumer as the midpoint (2j+1)/(2R) of
    its cell [j/R, (j+1)/R); the midpoint decides identically to every
    point of the cell whenever all of the consumer's decision thresholds
    are multiples of 1/R.
    """

    __slots__ = ("symbols", "alphabet_size", "position")

    def __init__(self, symbols, alphabet_size: int):
        if alphabet_size < 1:
            raise ValueError("alphabet size must be >= 1")
        if any(not (0 <= s < alphabet_size) for s in symbols):
            raise ValueError("symbol outside alphabet")
        self.symbols = tuple(symbols)
        self.alphabet_size = alphabet_size
        self.position = 0

    def draw(self) -> float:
        if self.position >= len(self.symbols):
            raise RuntimeError("discrete stream exhausted")
        s = self.symbols[self.position]
        self.position += 1
        return (2 * s + 1) / (2 * self.alphabet_size)
