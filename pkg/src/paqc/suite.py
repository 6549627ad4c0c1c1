"""The benchmark circuit suite.

Eight parameterized circuits, each with the default binding used by the
benchmarking harness, plus the two-version parity program used throughout the
tests.  Sources follow the published structural shape of each circuit
(statement count, register width, default-size op count); scaling studies
rebind the size parameter N.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import axl
from .scop import Scop, assemble

PARITY = """\
// parity: a NOT fan-in feeding one accumulator qubit, two formulations
param M;
statement S1, S2, S3;
S1 := { t : 1 <= t <= M ( #X(t) (+) #CNOT(t, 0) ) };
S2 := { t : 1 <= t <= M ( #X(t) ) };
S3 := { t : 1 <= t <= M ( #CNOT(t, 0) ) };
codegen { S1 } with { M = 8 } apply { plutomax };
codegen { S2 (+) S3 } with { M = 8 } apply { plutomin };
"""

ADDER_MAU = """\
// ripple-carry adder, majority / unmajority-and-add form
// layout: carry-in at 0, then (b_i, a_i) pairs at (2i+1, 2i+2), carry-out last
param N;
statement MAJ, CARRY, UMA;
MAJ := { i : 0 <= i < N (
  #CNOT(2*i+2, 2*i+1) (+) #CNOT(2*i+2, 2*i) (+) #Toffoli(2*i, 2*i+1, 2*i+2) ) };
CARRY := { i : i = N ( #CNOT(2*i, 2*i+1) ) };
UMA := { i : 0 <= i < N (
  #Toffoli(2*N-2*i-2, 2*N-2*i-1, 2*N-2*i) (+) #CNOT(2*N-2*i, 2*N-2*i-2)
  (+) #CNOT(2*N-2*i-2, 2*N-2*i-1) ) };
codegen { MAJ (+) CARRY (+) UMA } with { N = 9 };
"""

CUCCARO = """\
// depth-optimized ripple-carry adder: parallel prologue, carry ladder on the
// even rail, mirrored uncompute with sum correction
// layout: (a_i, b_i) at (2i, 2i+1), ancilla at 2N, carry-out at 2N+1
param N;
statement PRE, SEED, LADDER, TOP, BACK, SUM;
PRE := { i : 1 <= i < N ( #CNOT(2*i, 2*i+1) ) };
SEED := { i : i = 0 ( #X(2*N) (+) #CNOT(2, 2*N) (+) #Toffoli(0, 1, 2*N) ) };
LADDER := { i : 0 < i < N-1 ( #Toffoli(2*i, 2*i+1, 2*i+2) (+) #CNOT(2*i+2, 2*i+1) ) };
TOP := { i : i = N-1 ( #Toffoli(2*i, 2*i+1, 2*N+1) (+) #CNOT(2*i, 2*N+1) (+) #X(2*N+1) ) };
BACK := { i : 0 < i < N (
  #Toffoli(2*N-2*i-2, 2*N-2*i-1, 2*N-2*i) (+) #X(2*N-2*i-1)
  (+) #CNOT(2*N-2*i-2, 2*N-2*i-1) ) };
SUM := { i : 0 <= i < N ( #CNOT(2*i, 2*i+1) (+) #X(2*i+1) ) };
codegen { PRE (+) SEED (+) LADDER (+) TOP (+) BACK (+) SUM } with { N = 6 };
"""

SUM_TAKA = """\
// adder sum sub-circuit: wide parallel opening, pipelined carry middle,
// serial closing sweep
// layout: x_i at i, y_i at N+i, ancilla at 2N
param N;
statement OPEN, FAN, CHAIN, CAP, FOLD, CLOSE, FIX;
OPEN := { i : 0 <= i < N ( #CNOT(i, N+i) ) };
FAN := { i : 0 <= i < N ( #CNOT(i, 2*N) ) };
CHAIN := { i : 0 < i < N ( #CNOT(N+i, N+i+1) ) };
CAP := { i : i = 0 ( #Toffoli(0, N, 2*N) ) };
FOLD := { i : 0 < i < N ( #Toffoli(i, N+i, N+i+1) ) };
CLOSE := { i : 0 <= i < N ( #CNOT(N+i, i) ) };
FIX := { i : 0 < i < N ( #X(N+i) (+) #CNOT(i, N+i) (+) #X(i) ) };
codegen { OPEN (+) FAN (+) CHAIN (+) CAP (+) FOLD (+) CLOSE (+) FIX } with { N = 5 };
"""

INIT_TAKA = """\
// adder initial-value sub-circuit: serial opening, parallel closing phase
// layout: x_i at i, y_i at N+i, ancilla at 2N
param N;
statement LOAD, SEED, MIX, SPREAD, TAP, RIPPLE, FANOUT, FIX;
LOAD := { i : 0 < i < N ( #CNOT(N+i, i) ) };
SEED := { i : i = 0 ( #Toffoli(N, 0, 2*N) ) };
MIX := { i : 0 < i < N ( #Toffoli(i, N+i, i+1) ) };
SPREAD := { i : 0 < i < N ( #CNOT(i, N+i) ) };
TAP := { i : i = N-1 ( #CNOT(2*N, N+i) ) };
RIPPLE := { i : 0 < i < N ( #Toffoli(i-1, N+i-1, N+i) ) };
FANOUT := { i : 0 <= i < N ( #CNOT(i, N+i) ) };
FIX := { i : 0 < i < N ( #X(i) (+) #CNOT(N+i, i) (+) #X(N+i) ) };
codegen { LOAD (+) SEED (+) MIX (+) SPREAD (+) TAP (+) RIPPLE (+) FANOUT (+) FIX } with { N = 5 };
"""

CHEUNG = """\
// convolution product accumulation: one triangular statement of CCNOTs,
// row i accumulates into the same target qubit
// layout: first factor at 0..N-1, second at N..2N-1, accumulators at 2N..3N-1
param N;
statement CONV;
CONV := { i, j : 0 <= i < N, 0 <= j <= i ( #Toffoli(j, N+i-j, 2*N+i) ) };
codegen { CONV } with { N = 6 };
"""

PIPELINED = """\
// pipelined swap between the outermost qubits of a 2N+2 line: both ends
// stream toward the middle, exchange there, and stream back out
param N;
statement S1a, S1b, S1c;
statement S2a, S2b, S2c;
statement S3;
statement S4a, S4b, S4c;
statement S5a, S5b, S5c;

S1a := { i : 0 <= i < N ( #CNOT(i, i+1) ) };
S1b := { i : 0 <= i < N ( #CNOT(i+1, i) ) };
S1c := { i : 0 <= i < N ( #CNOT(i, i+1) ) };

S2a := { i : 0 <= i < N ( #CNOT(2*N+1-i, 2*N-i) ) };
S2b := { i : 0 <= i < N ( #CNOT(2*N-i, 2*N+1-i) ) };
S2c := { i : 0 <= i < N ( #CNOT(2*N+1-i, 2*N-i) ) };

S3 := { i : i = N ( #CNOT(i, i+1) (+) #CNOT(i+1, i) (+) #CNOT(i, i+1) ) };

S4a := { i : 0 <= i < N ( #CNOT(N+1+i, N+2+i) ) };
S4b := { i : 0 <= i < N ( #CNOT(N+2+i, N+1+i) ) };
S4c := { i : 0 <= i < N ( #CNOT(N+1+i, N+2+i) ) };

S5a := { i : 0 < i <= N ( #CNOT(N-i+1, N-i) ) };
S5b := { i : 0 < i <= N ( #CNOT(N-i, N-i+1) ) };
S5c := { i : 0 < i <= N ( #CNOT(N-i+1, N-i) ) };

codegen { S1a (+) S1b (+) S1c (+) S2a (+) S2b (+) S2c (+) S3 (+) S4a (+) S4b
  (+) S4c (+) S5a (+) S5b (+) S5c } with { N = 6 };
"""

CNT = """\
// binary-coded counter with count-control input: parallel per-digit prologue,
// then a carry cascade over digit blocks of four lines
param N;
statement DIGIT, CASCADE;
DIGIT := { i : 0 <= i < N ( #X(4*i) (+) #CNOT(4*i, 4*i+2) ) };
CASCADE := { i : 0 <= i < N-1 (
  #Toffoli(4*i, 4*i+2, 4*i+3) (+) #CNOT(4*i+2, 4*i+3)
  (+) #Toffoli(4*i+3, 4*i+4, 4*i+6) (+) #CNOT(4*i+3, 4*i+6) (+) #X(4*i+4) ) };
codegen { DIGIT (+) CASCADE } with { N = 5 };
"""

RD = """\
// ones-count circuit: M sweeps over 2N inputs with constant operand
// separation, then two carry-collection layers
param M, N;
statement SWEEP, COLLECT, CARRY;
SWEEP := { t, i : 0 <= t < M, 0 <= i < 2*N ( #CNOT(i, i+5) ) };
COLLECT := { i : 0 <= i < 2*N ( #Toffoli(i, i+5, i+6) ) };
CARRY := { i : 0 <= i < N ( #Toffoli(2*i, 2*i+5, 2*i+8) ) };
codegen { SWEEP (+) COLLECT (+) CARRY } with { M = 2, N = 4 };
"""


@dataclass(frozen=True)
class Benchmark:
    name: str
    source: str
    defaults: dict
    scaling_param: str | None = None


BENCHMARKS = {
    "adder_mau": Benchmark("adder_mau", ADDER_MAU, {"N": 9}),
    "cuccaro": Benchmark("cuccaro", CUCCARO, {"N": 6}),
    "sum": Benchmark("sum", SUM_TAKA, {"N": 5}),
    "init": Benchmark("init", INIT_TAKA, {"N": 5}),
    "cheung": Benchmark("cheung", CHEUNG, {"N": 6}, scaling_param="N"),
    "pipelined": Benchmark("pipelined", PIPELINED, {"N": 6}, scaling_param="N"),
    "cnt": Benchmark("cnt", CNT, {"N": 5}),
    "rd": Benchmark("rd", RD, {"M": 2, "N": 4}),
}

BENCHMARK_NAMES = tuple(BENCHMARKS)


def load_benchmark(name: str, binding: dict | None = None,
                   transform: str | None = None) -> Scop:
    """Assemble a suite circuit, optionally rebinding parameters."""
    bench = BENCHMARKS[name]
    prog = axl.load_program(bench.source)
    return assemble(prog, prog.directives[0], binding_override=binding,
                    transform_override=transform)


def parity_scops(transforms: tuple[str | None, str | None] = (None, None)):
    prog = axl.load_program(PARITY)
    return [assemble(prog, d, transform_override=t)
            for d, t in zip(prog.directives, transforms)]
