import threading
import time

import pytest

from interweave.channels import (
    InjectChannel,
    ProbeChannel,
    inject_put,
    inject_swap_in,
    inject_swap_out,
    probe_get,
    probe_put,
)
from interweave.errors import ChannelAborted, ChannelTimeout, ChannelUsageError


class ListRecorder:
    def __init__(self):
        self.events = []
        self._lock = threading.Lock()

    def record(self, channel, party, kind, values):
        with self._lock:
            self.events.append((channel, party, kind, values))


def spawn(fn, *args):
    out = {}

    def body():
        try:
            out["value"] = fn(*args)
        except BaseException as exc:  # noqa: BLE001
            out["error"] = exc

    t = threading.Thread(target=body, daemon=True)
    t.start()
    return t, out


def test_probe_transfers_in_order():
    ch = ProbeChannel(timeout=2.0)
    values = [3, -1, 0, 7, 7]

    def produce():
        for v in values:
            probe_put(ch, v)

    t, out = spawn(produce)
    got = [probe_get(ch) for _ in values]
    t.join()
    assert got == values
    assert "error" not in out
    assert ch.available is False


def test_probe_put_blocks_until_taken():
    ch = ProbeChannel(timeout=2.0)
    t, out = spawn(lambda: (ch.put(1), ch.put(2)))
    time.sleep(0.05)
    assert ch.available and ch.slot == 1  # second put waits on the full slot
    assert ch.get() == 1
    assert ch.get() == 2
    t.join()


def test_probe_get_times_out_when_nothing_comes():
    ch = ProbeChannel(timeout=0.05)
    with pytest.raises(ChannelTimeout):
        ch.get()


def test_probe_put_times_out_on_full_slot():
    ch = ProbeChannel(timeout=0.05)
    ch.put(1)
    with pytest.raises(ChannelTimeout):
        ch.put(2)


def test_abort_wakes_waiter():
    ch = ProbeChannel(timeout=5.0)
    t, out = spawn(ch.get)
    time.sleep(0.02)
    ch.abort()
    t.join(1.0)
    assert not t.is_alive()
    assert isinstance(out["error"], ChannelAborted)


def test_roles_are_bound_to_one_thread():
    ch = ProbeChannel(timeout=1.0)
    ch.put(1)
    t, out = spawn(ch.put, 2)
    t.join()
    assert isinstance(out["error"], ChannelUsageError)


def test_inject_round_trip():
    """The producer reads the input by swapping in 0 and hands it back at the end."""
    rec = ListRecorder()
    ch = InjectChannel(timeout=2.0, recorder=rec)

    def producer():
        got = inject_swap_in(ch, 0)
        assert ch.slot == 0
        back = inject_swap_out(ch, got)
        return got, back

    t, out = spawn(producer)
    time.sleep(0.02)
    assert "value" not in out  # swap_in waits for the input to be set
    inject_put(ch, 9)
    t.join()
    assert out["value"] == (9, 0)
    assert ch.slot == 9 and ch.not_set
    assert [e[2] for e in rec.events] == ["PUT", "SWAP_IN", "SWAP_OUT"]
    assert rec.events[1][3] == (0, 9)
    assert rec.events[2][3] == (9, 0)


def test_inject_put_waits_for_previous_round():
    ch = InjectChannel(timeout=0.05)
    ch.put(1)
    with pytest.raises(ChannelTimeout):
        ch.put(2)


def test_inject_swap_in_times_out_without_input():
    ch = InjectChannel(timeout=0.05)
    with pytest.raises(ChannelTimeout):
        ch.swap_in(0)


def test_recorder_sees_rendezvous_order():
    rec = ListRecorder()
    ch = ProbeChannel(timeout=2.0, recorder=rec)
    t, _ = spawn(lambda: [ch.put(v) for v in (1, 2, 3)])
    for _ in range(3):
        ch.get()
    t.join()
    kinds = [(e[2], e[3][0]) for e in rec.events]
    assert kinds == [("PUT", 1), ("GET", 1), ("PUT", 2), ("GET", 2), ("PUT", 3), ("GET", 3)]
