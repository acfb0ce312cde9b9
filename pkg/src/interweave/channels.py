"""Single-slot synchronous channels between the producer and the consumer.

``ProbeChannel`` carries produced values towards the consumer; puts and gets
strictly alternate. ``InjectChannel`` carries the initial input towards the
producer and takes it back at the end through a pair of swaps.

Both channels follow the same flag algebra as the monitor-based original:
a party waits while the flag says it may not proceed, updates the slot,
flips the flag when the protocol calls for it and wakes the other party.
Waits are bounded by ``timeout`` so that a protocol bug surfaces as
:class:`ChannelTimeout` instead of a hung process.
"""

from __future__ import annotations

import threading
import time
from typing import Callable, Optional, Protocol

from .errors import ChannelAborted, ChannelTimeout, ChannelUsageError

DEFAULT_TIMEOUT = 5.0


class Recorder(Protocol):
    def record(self, channel: str, party: str, kind: str, values: tuple[int, ...]) -> None: ...


class _Channel:
    name = "channel"

    def __init__(
        self,
        timeout: float = DEFAULT_TIMEOUT,
        recorder: Optional[Recorder] = None,
        pause: Optional[Callable[[], None]] = None,
    ) -> None:
        self.timeout = timeout
        self._cond = threading.Condition()
        self._recorder = recorder
        self._pause = pause
        self._parties: dict[str, int] = {}
        self._aborted = False

    def abort(self) -> None:
        """Wake every waiter with :class:`ChannelAborted`; used when a party dies."""
        with self._cond:
            self._aborted = True
            self._cond.notify_all()

    def _enter(self, party: str) -> None:
        if self._pause is not None:
            self._pause()
        me = threading.get_ident()
        owner = self._parties.setdefault(party, me)
        if owner != me:
            raise ChannelUsageError(f"{self.name}: a second thread is acting as the {party}")

    def _wait_while(self, blocked: Callable[[], bool], op: str) -> None:
        deadline = time.monotonic() + self.timeout
        while blocked():
            if self._aborted:
                raise ChannelAborted(f"{self.name}.{op}: channel aborted")
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise ChannelTimeout(f"{self.name}.{op} waited more than {self.timeout}s")
            self._cond.wait(remaining)

    def _record(self, party: str, kind: str, *values: int) -> None:
        if self._recorder is not None:
            self._recorder.record(self.name, party, kind, values)


class ProbeChannel(_Channel):
    name = "PROBE"

    def __init__(self, *args, **kwargs) -> None:
        super().__init__(*args, **kwargs)
        self.slot = 0
        self.available = False

    def put(self, v: int) -> None:
        self._enter("producer")
        with self._cond:
            self._wait_while(lambda: self.available, "put")
            self.slot = v
            self.available = not self.available
            self._record("producer", "PUT", v)
            self._cond.notify_all()

    def get(self) -> int:
        self._enter("consumer")
        with self._cond:
            self._wait_while(lambda: not self.available, "get")
            out = self.slot
            self.available = not self.available
            self._record("consumer", "GET", out)
            self._cond.notify_all()
            return out


class InjectChannel(_Channel):
    name = "INJECT"

    def __init__(self, *args, **kwargs) -> None:
        super().__init__(*args, **kwargs)
        self.slot = 0
        self.not_set = True

    def put(self, v: int) -> None:
        self._enter("consumer")
        with self._cond:
            self._wait_while(lambda: not self.not_set, "put")
            self.slot = v
            self.not_set = not self.not_set
            self._record("consumer", "PUT", v)
            self._cond.notify_all()

    def get(self) -> int:
        # never used by the interaction protocol; reads without toggling
        with self._cond:
            self._wait_while(lambda: self.not_set, "get")
            out = self.slot
            self._record("consumer", "GET", out)
            self._cond.notify_all()
            return out

    def swap_in(self, v: int) -> int:
        self._enter("producer")
        with self._cond:
            self._wait_while(lambda: self.not_set, "swap_in")
            out, self.slot = self.slot, v
            self._record("producer", "SWAP_IN", v, out)
            self._cond.notify_all()
            return out

    def swap_out(self, v: int) -> int:
        self._enter("producer")
        with self._cond:
            out, self.slot = self.slot, v
            self.not_set = not self.not_set
            self._record("producer", "SWAP_OUT", v, out)
            self._cond.notify_all()
            return out


# functional spellings of the channel operations


def probe_put(ch: ProbeChannel, v: int) -> None:
    ch.put(v)


def probe_get(ch: ProbeChannel) -> int:
    return ch.get()


def inject_put(ch: InjectChannel, v: int) -> None:
    ch.put(v)


def inject_get(ch: InjectChannel) -> int:
    return ch.get()


def inject_swap_in(ch: InjectChannel, v: int) -> int:
    return ch.swap_in(v)


def inject_swap_out(ch: InjectChannel, v: int) -> int:
    return ch.swap_out(v)
