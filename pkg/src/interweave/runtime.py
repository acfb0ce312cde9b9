"""Run the producer and consumer as two threads and check what they did.

Every channel operation is logged together with the party that performed it.
Within one party the log follows program order and within one channel it
follows the channel's own order (a ``PROBE.PUT`` always precedes its
``PROBE.GET``). The trace is the linearization of those two orders that
schedules the consumer first whenever both parties could move, so it does
not depend on how the threads were actually interleaved; what changes
between schedules can only be the values, which is what the sweep checks.
"""

from __future__ import annotations

import logging
import random
import threading
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .channels import DEFAULT_TIMEOUT, InjectChannel, ProbeChannel
from .errors import ChannelAborted, ChannelTimeout, NegativeInput
from .scheme import Scheme, rec_oracle, validate_scheme
from .weave import (
    REFERENCE_INITIAL,
    RIR_INITIAL,
    ProducerPlan,
    consumer,
    expected_counters,
    gen_producer,
    monolithic_itg,
    reference_producer,
    rir_producer,
)

log = logging.getLogger(__name__)

PRODUCER_KINDS = ("rir", "reference")
FAULTS = ("drop-last-put", "duplicate-put", "corrupt-put")
VERDICTS = ("oracle_equal", "registers_restored", "trace_deterministic", "no_deadlock")

_GATES = {"rir": ("divGate", "nonDivGate"), "reference": ("predDivX", "predNotDivX")}


# --------------------------------------------------------------------------
# Trace


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    kind: str
    values: tuple[int, ...]

    def __str__(self) -> str:
        return f"SEQ={self.seq} {self.kind} " + " ".join(map(str, self.values))

    @classmethod
    def parse(cls, line: str) -> "TraceEvent":
        head, kind, *values = line.split()
        if not head.startswith("SEQ="):
            raise ValueError(f"not a trace line: {line!r}")
        return cls(int(head[4:]), kind, tuple(int(v) for v in values))


@dataclass(frozen=True)
class _Logged:
    channel: str
    party: str
    kind: str
    values: tuple[int, ...]
    channel_index: int


class TraceRecorder:
    """Append-only log of channel operations, safe to share between threads."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._by_party: dict[str, list[_Logged]] = {"consumer": [], "producer": []}
        self._channel_count: dict[str, int] = {}
        self.raw: list[_Logged] = []

    def record(self, channel: str, party: str, kind: str, values: tuple[int, ...]) -> None:
        with self._lock:
            index = self._channel_count.get(channel, 0)
            self._channel_count[channel] = index + 1
            entry = _Logged(channel, party, f"{channel}.{kind}", tuple(values), index)
            self._by_party.setdefault(party, []).append(entry)
            self.raw.append(entry)

    def events(self) -> list[TraceEvent]:
        with self._lock:
            queues = {p: list(q) for p, q in self._by_party.items()}
        done: dict[str, int] = {}  # events emitted so far, per channel
        heads = dict.fromkeys(queues, 0)
        out: list[_Logged] = []
        order = ["consumer", "producer"] + sorted(set(queues) - {"consumer", "producer"})
        while True:
            for party in order:
                i = heads[party]
                if i < len(queues[party]):
                    e = queues[party][i]
                    if e.channel_index == done.get(e.channel, 0):
                        out.append(e)
                        done[e.channel] = e.channel_index + 1
                        heads[party] += 1
                        break
            else:
                break
        leftover = [e for p in order for e in queues[p][heads[p] :]]
        return [TraceEvent(n, e.kind, e.values) for n, e in enumerate(out + leftover)]


class Scheduler:
    """Seeded perturbation of thread timing, applied before each channel op."""

    def __init__(self, seed: int, max_delay: float = 2e-4) -> None:
        self._rng = random.Random(seed)
        self._lock = threading.Lock()
        self.max_delay = max_delay

    def pause(self) -> None:
        with self._lock:
            r = self._rng.random()
            delay = self._rng.uniform(0, self.max_delay)
        if r < 0.4:
            return
        time.sleep(0 if r < 0.8 else delay)


class _FaultyProbe:
    """Wraps the producer's view of the probe to break the protocol on purpose."""

    def __init__(self, probe: ProbeChannel, fault: str, total_puts: int) -> None:
        if fault not in FAULTS:
            raise ValueError(f"unknown fault {fault!r}; expected one of {FAULTS}")
        self._probe = probe
        self._fault = fault
        self._total = total_puts
        self._count = 0

    def put(self, v: int) -> None:
        i = self._count
        self._count += 1
        if self._fault == "drop-last-put" and i == self._total - 1:
            return
        if self._fault == "duplicate-put" and i == 0:
            self._probe.put(v)
        if self._fault == "corrupt-put" and i == 1:
            v += 1
        self._probe.put(v)


# --------------------------------------------------------------------------
# Reports


@dataclass
class RunReport:
    scheme: str
    x: int
    producer_kind: str
    seed: Optional[int]
    strict_ancilla: bool
    result: Optional[int]
    trace: list[TraceEvent]
    final_registers: dict[str, int]
    verdicts: dict[str, bool] = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def timed_out(self) -> bool:
        return not self.verdicts.get("no_deadlock", True)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.get(k, False) for k in VERDICTS)

    def trace_text(self) -> str:
        return "".join(f"{e}\n" for e in self.trace)

    def probe_values(self) -> list[int]:
        return [e.values[0] for e in self.trace if e.kind == "PROBE.PUT"]

    def to_text(self, timing: bool = False) -> str:
        lines = [
            f"scheme={self.scheme}",
            f"input={self.x}",
            f"producer={self.producer_kind}",
            f"seed={self.seed}",
            f"strict_ancilla={str(self.strict_ancilla).lower()}",
            f"result={'none' if self.result is None else self.result}",
        ]
        lines += [f"register.{k}={v}" for k, v in self.final_registers.items()]
        lines += [f"verdict.{k}={'pass' if v else 'fail'}" for k, v in self.verdicts.items()]
        lines += [f"error={e}" for e in self.errors]
        if timing:
            lines.append(f"wall_time={self.wall_time:.6f}")
        lines.append("trace:")
        lines += [str(e) for e in self.trace]
        lines.append("end")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunReport":
        fields: dict[str, str] = {}
        registers: dict[str, int] = {}
        verdicts: dict[str, bool] = {}
        errors: list[str] = []
        trace: list[TraceEvent] = []
        in_trace = False
        for line in text.splitlines():
            if in_trace:
                if line == "end":
                    in_trace = False
                else:
                    trace.append(TraceEvent.parse(line))
                continue
            if line == "trace:":
                in_trace = True
                continue
            key, _, value = line.partition("=")
            if key.startswith("register."):
                registers[key[9:]] = int(value)
            elif key.startswith("verdict."):
                verdicts[key[8:]] = value == "pass"
            elif key == "error":
                errors.append(value)
            else:
                fields[key] = value
        return cls(
            scheme=fields["scheme"],
            x=int(fields["input"]),
            producer_kind=fields["producer"],
            seed=None if fields["seed"] == "None" else int(fields["seed"]),
            strict_ancilla=fields["strict_ancilla"] == "true",
            result=None if fields["result"] == "none" else int(fields["result"]),
            trace=trace,
            final_registers=registers,
            verdicts=verdicts,
            errors=errors,
            wall_time=float(fields.get("wall_time", 0.0)),
        )


# --------------------------------------------------------------------------
# Running


@lru_cache(maxsize=64)
def producer_plan(delta_p: int, strict: bool) -> ProducerPlan:
    plan = gen_producer(delta_p, strict)
    plan.program  # compile once, outside the timed threads
    return plan


class _Party(threading.Thread):
    def __init__(self, name: str, target, channels: Sequence) -> None:
        super().__init__(name=name, daemon=True)
        self._target_fn = target
        self._channels = channels
        self.value = None
        self.error: Optional[BaseException] = None

    def run(self) -> None:
        try:
            self.value = self._target_fn()
        except (ChannelTimeout, ChannelAborted) as exc:
            self.error = exc
        except BaseException as exc:  # noqa: BLE001 - surfaced by the coordinator
            self.error = exc
            for ch in self._channels:
                ch.abort()


def run_interleaved(
    s: Scheme,
    x: int,
    producer_kind: str = "rir",
    seed: Optional[int] = 0,
    strict_ancilla: bool = False,
    timeout: float = DEFAULT_TIMEOUT,
    fault: Optional[str] = None,
) -> RunReport:
    """Run consumer and producer concurrently over fresh channels.

    ``seed`` drives a :class:`Scheduler` that perturbs timing at every channel
    operation (``None`` disables it). Overflow and other party errors are
    re-raised; channel timeouts are reported through ``no_deadlock``.
    """
    validate_scheme(s)
    if x < 0:
        raise NegativeInput(f"input must be non-negative, got {x}")
    if producer_kind not in PRODUCER_KINDS:
        raise ValueError(f"producer_kind must be one of {PRODUCER_KINDS}")
    recorder = TraceRecorder()
    pause = Scheduler(seed).pause if seed is not None else None
    probe = ProbeChannel(timeout, recorder, pause)
    inject = InjectChannel(timeout, recorder, pause)
    channels = (probe, inject)

    producer_probe = probe
    if fault is not None:
        g, _, _ = expected_counters(s.delta_p, x)
        producer_probe = _FaultyProbe(probe, fault, g + 2)

    if producer_kind == "rir":
        plan = producer_plan(s.delta_p, strict_ancilla)
        produce = lambda: rir_producer(plan, producer_probe, inject)  # noqa: E731
    else:
        produce = lambda: reference_producer(  # noqa: E731
            s.delta_p, producer_probe, inject, strict=strict_ancilla
        )
    parties = [
        _Party("consumer", lambda: consumer(s, probe, inject, x), channels),
        _Party("producer", produce, channels),
    ]
    start = time.perf_counter()
    for party in parties:
        party.start()
    hung = False
    for party in parties:
        party.join(2 * timeout + 1.0)
        hung = hung or party.is_alive()
    wall = time.perf_counter() - start
    if hung:
        for ch in channels:
            ch.abort()

    cons, prod = parties
    for party in parties:
        if party.error is not None and not isinstance(party.error, (ChannelTimeout, ChannelAborted)):
            raise party.error
    errors = [f"{p.name}: {p.error}" for p in parties if p.error is not None]
    if hung:
        errors.append("coordinator: a party did not finish")
    result = cons.value if cons.error is None and not hung else None

    trace = recorder.events()
    if result is not None:
        trace.append(TraceEvent(len(trace), "RESULT", (result,)))
    registers = dict(prod.value) if prod.error is None and prod.value else {}
    if inject.not_set and registers:
        registers["inject_slot"] = inject.slot
    report = RunReport(
        scheme=s.name,
        x=x,
        producer_kind=producer_kind,
        seed=seed,
        strict_ancilla=strict_ancilla,
        result=result,
        trace=trace,
        final_registers=registers,
        errors=errors,
        wall_time=wall,
    )
    report.verdicts = verify_run(report, s, x)
    report.verdicts["no_deadlock"] = not errors
    return report


# --------------------------------------------------------------------------
# Verification


def restoration_targets(producer_kind: str, strict: bool) -> dict[str, int]:
    """Registers, and the values they must hold, after a complete run."""
    initial = RIR_INITIAL if producer_kind == "rir" else REFERENCE_INITIAL
    gates = _GATES[producer_kind]
    return {k: v for k, v in initial.items() if strict or k not in gates}


def trace_well_formed(trace: Sequence[TraceEvent]) -> bool:
    """Contiguous numbering, and every probe put is immediately taken unchanged."""
    if [e.seq for e in trace] != list(range(len(trace))):
        return False
    for i, e in enumerate(trace):
        if e.kind == "PROBE.PUT":
            if i + 1 >= len(trace):
                return False
            nxt = trace[i + 1]
            if nxt.kind != "PROBE.GET" or nxt.values != e.values:
                return False
        if e.kind == "PROBE.GET" and (i == 0 or trace[i - 1].kind != "PROBE.PUT"):
            return False
    return True


def verify_run(
    report: RunReport,
    s: Scheme,
    x: int,
    reference_trace: Optional[Sequence[TraceEvent]] = None,
) -> dict[str, bool]:
    """Recompute the verdicts of a finished run.

    ``trace_deterministic`` checks well-formedness and, when another run of
    the same configuration is supplied, equality with its trace.
    """
    expected = rec_oracle(s, x)
    mono, _ = monolithic_itg(s, x)
    regs = report.final_registers
    targets = restoration_targets(report.producer_kind, report.strict_ancilla)
    restored = bool(regs) and all(regs.get(k) == v for k, v in targets.items())
    deterministic = trace_well_formed(report.trace)
    if reference_trace is not None:
        deterministic = deterministic and list(reference_trace) == list(report.trace)
    return {
        "oracle_equal": report.result is not None and report.result == expected == mono,
        "registers_restored": restored,
        "trace_deterministic": deterministic,
        "no_deadlock": not report.errors,
    }


@dataclass
class SweepSummary:
    runs: int = 0
    failures: int = 0
    timeouts: int = 0
    first_counterexample: Optional[tuple[int, str, int]] = None
    failed_checks: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def table(self) -> str:
        ce = "none" if self.first_counterexample is None else "x={} producer={} seed={}".format(
            *self.first_counterexample
        )
        lines = [
            f"runs={self.runs}",
            f"failures={self.failures}",
            f"timeouts={self.timeouts}",
            f"first_counterexample={ce}",
        ]
        lines += [f"failed.{k}={v}" for k, v in sorted(self.failed_checks.items())]
        return "\n".join(lines)


def sweep(
    s: Scheme,
    x_max: int,
    seeds: int,
    strict_ancilla: bool = False,
    kinds: Iterable[str] = PRODUCER_KINDS,
    timeout: float = DEFAULT_TIMEOUT,
    fault: Optional[str] = None,
) -> SweepSummary:
    """Run every ``x`` in ``0..=x_max`` for each producer kind and seed."""
    if x_max < 0:
        raise NegativeInput(f"x_max must be non-negative, got {x_max}")
    summary = SweepSummary()
    for x in range(x_max + 1):
        for kind in kinds:
            first: Optional[list[TraceEvent]] = None
            for seed in range(seeds):
                report = run_interleaved(s, x, kind, seed, strict_ancilla, timeout, fault)
                verdicts = verify_run(report, s, x, first)
                if first is None:
                    first = report.trace
                summary.runs += 1
                bad = [k for k, v in verdicts.items() if not v]
                if not bad:
                    continue
                summary.failures += 1
                if not verdicts["no_deadlock"]:
                    summary.timeouts += 1
                for k in bad:
                    summary.failed_checks[k] = summary.failed_checks.get(k, 0) + 1
                if summary.first_counterexample is None:
                    summary.first_counterexample = (x, kind, seed)
                    log.info("first failing run: x=%d kind=%s seed=%d %s", x, kind, seed, bad)
    return summary
