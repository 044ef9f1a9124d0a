"""Block-genome circuit representation for evolutionary search.

A library holds, per genome position, a list of candidate blocks (gate
fragments tagged by role). A genome picks one block per position; decoding
concatenates the chosen blocks' gates, renumbering variational slots so the
assembled circuit owns a contiguous parameter vector.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..circuit import Binding, GateOp, ParamCircuit, VAR
from ..statevec import pauli_z

__all__ = ["Block", "BlockLibrary", "Genome", "decode", "mutate",
           "random_genome", "enumerate_genomes", "bell_library"]

TAGS = ("encoding", "variational", "entangling", "measurement")

# a genome is one candidate index per library slot
Genome = tuple[int, ...]


@dataclass(frozen=True)
class Block:
    """A named gate fragment; variational slots are block-local (0-based)."""

    name: str
    tag: str
    ops: tuple[GateOp, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "ops", tuple(self.ops))
        if self.tag not in TAGS:
            raise ValueError(f"unknown block tag {self.tag!r}")

    @property
    def is_empty(self) -> bool:
        return not self.ops

    @property
    def n_var_slots(self) -> int:
        slots = [op.param.index for op in self.ops
                 if op.param is not None and op.param.kind == VAR]
        return max(slots) + 1 if slots else 0

    @property
    def n_input_slots(self) -> int:
        slots = [op.param.index for op in self.ops
                 if op.param is not None and op.param.kind == "input"]
        return max(slots) + 1 if slots else 0


@dataclass(frozen=True)
class BlockLibrary:
    """Per-position candidate blocks over a fixed qubit count."""

    n_qubits: int
    slots: tuple[tuple[Block, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "slots",
                           tuple(tuple(s) for s in self.slots))
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        if not self.slots:
            raise ValueError("library needs at least one slot")
        for i, slot in enumerate(self.slots):
            if not slot:
                raise ValueError(f"slot {i} has no candidate blocks")
            for block in slot:
                for op in block.ops:
                    if any(q >= self.n_qubits for q in op.targets):
                        raise ValueError(
                            f"slot {i}: block {block.name!r} targets a qubit "
                            f"outside 0..{self.n_qubits - 1}")

    @property
    def n_genomes(self) -> int:
        out = 1
        for slot in self.slots:
            out *= len(slot)
        return out


def decode(genome: Genome, library: BlockLibrary,
           observables=None) -> ParamCircuit:
    """Concatenate the genome's blocks into one circuit.

    Variational slots renumber sequentially across blocks; input slots keep
    their indices (shared slots re-upload the same feature). Default
    observables are Pauli-Z on every qubit.
    """
    if len(genome) > len(library.slots):
        raise ValueError(f"genome length {len(genome)} exceeds "
                         f"{len(library.slots)} library slots")
    ops: list[GateOp] = []
    var_offset = 0
    input_dim = 0
    for pos, block_id in enumerate(genome):
        slot = library.slots[pos]
        if not 0 <= block_id < len(slot):
            raise ValueError(
                f"genome[{pos}]: unknown block id {block_id} "
                f"(slot has {len(slot)} candidates)")
        block = slot[block_id]
        for op in block.ops:
            if op.param is not None and op.param.kind == VAR:
                op = GateOp(op.gate, op.targets,
                            Binding.var_slot(var_offset + op.param.index))
            ops.append(op)
        var_offset += block.n_var_slots
        input_dim = max(input_dim, block.n_input_slots)
    if observables is None:
        observables = tuple(pauli_z(q) for q in range(library.n_qubits))
    return ParamCircuit(n_qubits=library.n_qubits, ops=tuple(ops),
                        observables=tuple(observables),
                        input_dim=input_dim, n_params=var_offset)


def random_genome(library: BlockLibrary, rng: np.random.Generator) -> Genome:
    return tuple(int(rng.integers(len(slot))) for slot in library.slots)


def mutate(genome: Genome, library: BlockLibrary,
           rng: np.random.Generator) -> Genome:
    """Point mutation: resample one position to a different block.

    Positions whose slot has a single candidate cannot change; the position
    is drawn among the mutable ones. A library with no mutable slot returns
    the genome unchanged.
    """
    mutable = [i for i in range(len(genome)) if len(library.slots[i]) > 1]
    if not mutable:
        return genome
    pos = int(rng.choice(mutable))
    others = [b for b in range(len(library.slots[pos])) if b != genome[pos]]
    new = list(genome)
    new[pos] = int(rng.choice(others))
    return tuple(new)


def enumerate_genomes(library: BlockLibrary):
    """All genomes in lexicographic order; only sane for desk-scale libraries."""
    return itertools.product(*(range(len(slot)) for slot in library.slots))


def _empty() -> Block:
    return Block("id", "variational", ())


def bell_library() -> BlockLibrary:
    """Two-qubit library whose optimum under Bell-state fidelity is known.

    108 genomes, small enough for exhaustive enumeration; H(0) followed by
    CNOT(0,1) reaches fidelity 1.
    """
    h0 = Block("h0", "variational", (GateOp("H", (0,)),))
    h1 = Block("h1", "variational", (GateOp("H", (1,)),))
    x0 = Block("x0", "variational", (GateOp("X", (0,)),))
    cnot01 = Block("cnot01", "entangling", (GateOp("CNOT", (0, 1)),))
    cnot10 = Block("cnot10", "entangling", (GateOp("CNOT", (1, 0)),))
    return BlockLibrary(n_qubits=2, slots=(
        (_empty(), h0, h1, x0),
        (_empty(), cnot01, cnot10),
        (_empty(), h0, h1),
        (_empty(), cnot01, cnot10),
    ))
