import random
import threading

import pytest

from convergegw import errors
from convergegw.telecom import TelecomService

from oracles import enumerate_action_sequences, reference_call_fsm

USERS = {"A", "B", "C"}


@pytest.fixture()
def tel():
    return TelecomService(user_exists=lambda u: u in USERS,
                          username_of=lambda u: u.lower())


# ---- presence ----

def test_fresh_user_offline(tel):
    assert tel.get_presence("A").status == "offline"


def test_presence_read_your_write(tel):
    tel.set_presence("A", "busy")
    assert tel.get_presence("A").status == "busy"


def test_presence_last_write_wins(tel):
    tel.set_presence("A", "busy")
    tel.set_presence("A", "available")
    assert tel.get_presence("A").status == "available"


def test_presence_unknown_user(tel):
    with pytest.raises(errors.UnknownUser):
        tel.get_presence("nobody")


def test_note_too_long(tel):
    with pytest.raises(errors.NoteTooLong):
        tel.set_presence("A", "busy", "x" * 257)


def test_presence_change_notifies_speed_dial_owner(tel):
    tel.add_speed_dial("B", 1, "A", "Alice")
    tel.set_presence("A", "available")
    events, cursor = tel.poll_events("B", 0)
    kinds = [e.kind for e in events]
    assert kinds == ["presence_changed"]
    assert events[0].payload["user_id"] == "A"


# ---- messaging ----

def test_message_seq_counter(tel):
    m1 = tel.send_message("A", "B", "hi")
    m2 = tel.send_message("A", "B", "there")
    assert (m1.seq, m2.seq) == (1, 2)


def test_messages_delivered_in_seq_order(tel):
    tel.send_message("A", "B", "one")
    tel.send_message("A", "B", "two")
    events, _ = tel.poll_events("B", 0)
    seqs = [e.payload["seq"] for e in events if e.kind == "message"]
    assert seqs == [1, 2]


def test_interleaved_senders_fifo_per_pair(tel):
    rng = random.Random(3)
    sent = {"A": [], "C": []}
    for _ in range(100):
        sender = rng.choice(["A", "C"])
        msg = tel.send_message(sender, "B", f"m{len(sent[sender])}")
        sent[sender].append(msg.seq)
    events, _ = tel.poll_events("B", 0)
    per_sender = {"A": [], "C": []}
    for e in events:
        if e.kind == "message":
            per_sender[e.payload["from"]].append(e.payload["seq"])
    assert per_sender["A"] == sorted(per_sender["A"]) == sent["A"]
    assert per_sender["C"] == sorted(per_sender["C"]) == sent["C"]


def test_body_too_long(tel):
    with pytest.raises(errors.BodyTooLong):
        tel.send_message("A", "B", "x" * 4097)


def test_message_unknown_recipient(tel):
    with pytest.raises(errors.UnknownUser):
        tel.send_message("A", "nobody", "hi")


# ---- calls: scenarios ----

def test_call_to_available_user_rings(tel):
    tel.set_presence("B", "available")
    sess = tel.place_call("A", "B")
    assert sess.state == "ringing"
    events, _ = tel.poll_events("B", 0)
    assert [e.kind for e in events] == ["incoming_call"]


def test_call_to_offline_user_fails_with_voicemail(tel):
    sess = tel.place_call("A", "B")
    assert sess.state == "failed"
    events, _ = tel.poll_events("B", 0)
    assert [e.kind for e in events] == ["message"]
    assert "issed call" in events[0].payload["body"]


def test_self_call_rejected(tel):
    with pytest.raises(errors.SelfCall):
        tel.place_call("A", "A")


def test_answer_then_hangup_timestamps(tel):
    tel.set_presence("B", "available")
    sess = tel.place_call("A", "B")
    tel.answer_call("B", sess.session_id)
    ended = tel.hangup("A", sess.session_id)
    assert ended.state == "terminated"
    assert ended.answered_at >= ended.created_at
    assert ended.ended_at >= ended.answered_at


def test_answer_by_caller_not_callee(tel):
    tel.set_presence("B", "available")
    sess = tel.place_call("A", "B")
    with pytest.raises(errors.NotCallee):
        tel.answer_call("A", sess.session_id)


def test_reject_after_answer_invalid(tel):
    tel.set_presence("B", "available")
    sess = tel.place_call("A", "B")
    tel.answer_call("B", sess.session_id)
    with pytest.raises(errors.InvalidTransition):
        tel.reject_call("B", sess.session_id)


def test_third_party_not_participant(tel):
    tel.set_presence("B", "available")
    sess = tel.place_call("A", "B")
    with pytest.raises(errors.NotParticipant):
        tel.hangup("C", sess.session_id)


# ---- calls: exhaustive FSM equivalence ----

IMPL_ERROR_MAP = {
    errors.UnknownSession: "unknown_session",
    errors.NotCallee: "not_callee",
    errors.InvalidTransition: "invalid_transition",
    errors.NotParticipant: "not_participant",
}


def run_impl_sequence(seq):
    """Drive a fresh service through one action sequence; return the list
    of (state_after, error_code) observations for the tracked A->B call."""
    tel = TelecomService(user_exists=lambda u: u in USERS)
    tel.set_presence("A", "available")
    tel.set_presence("B", "available")
    tracked = None
    out = []
    for verb, party in seq:
        user = "A" if party == "caller" else "B"
        err = None
        try:
            if verb == "place":
                if tracked is None and party == "caller":
                    tracked = tel.place_call("A", "B")
                else:
                    tel.place_call(user, "B" if user == "A" else "A")
                    err = "ignored"
            else:
                sid = tracked.session_id if tracked is not None else "missing"
                if verb == "answer":
                    tel.answer_call(user, sid)
                elif verb == "reject":
                    tel.reject_call(user, sid)
                elif verb == "hangup":
                    tel.hangup(user, sid)
        except tuple(IMPL_ERROR_MAP) as e:
            err = IMPL_ERROR_MAP[type(e)]
        state = tracked.state if tracked is not None else "none"
        out.append((state, err))
    return out


def run_oracle_sequence(seq):
    state = "none"
    out = []
    for verb, party in seq:
        state, err = reference_call_fsm(state, verb, party)
        out.append((state, err))
    return out


def test_call_fsm_matches_reference_up_to_length_4():
    seqs = enumerate_action_sequences(4)
    assert len(seqs) == 1 + 8 + 64 + 512 + 4096
    for seq in seqs:
        assert run_impl_sequence(seq) == run_oracle_sequence(seq), seq


def test_final_states_absorbing(tel):
    tel.set_presence("B", "available")
    for closer in ("reject", "hangup"):
        sess = tel.place_call("A", "B")
        if closer == "reject":
            tel.reject_call("B", sess.session_id)
        else:
            tel.hangup("A", sess.session_id)
        for user, op in (("B", tel.answer_call), ("B", tel.reject_call),
                         ("A", tel.hangup)):
            with pytest.raises(errors.InvalidTransition):
                op(user, sess.session_id)


# ---- events ----

def test_poll_empty_no_wait(tel):
    assert tel.poll_events("A", 0) == ([], 0)


def test_poll_exactly_once_per_cursor(tel):
    tel.send_message("A", "B", "hi")
    events, cursor = tel.poll_events("B", 0)
    assert len(events) == 1 and cursor == events[0].event_id
    assert tel.poll_events("B", cursor) == ([], cursor)


def test_poll_blocks_until_event(tel):
    result = {}

    def poller():
        result["got"] = tel.poll_events("B", 0, wait_ms=5000)

    t = threading.Thread(target=poller)
    t.start()
    # wait until the poller is registered, then publish
    for _ in range(200):
        if tel.events.has_waiting_poll("B"):
            break
        threading.Event().wait(0.01)
    tel.send_message("A", "B", "wake")
    t.join(timeout=5)
    assert not t.is_alive()
    events, _ = result["got"]
    assert [e.kind for e in events] == ["message"]


def test_concurrent_producers_exactly_once(tel):
    per_producer = 100
    senders = ["A", "C"]

    def produce(sender):
        for i in range(per_producer):
            tel.send_message(sender, "B", f"{sender}-{i}")

    threads = [threading.Thread(target=produce, args=(s,)) for s in senders]
    extra = threading.Thread(
        target=lambda: [tel.set_presence("A", "busy") for _ in range(per_producer)])
    tel.add_speed_dial("B", 1, "A", "a")  # so presence events reach B
    for t in threads + [extra]:
        t.start()
    for t in threads + [extra]:
        t.join()
    collected = []
    cursor = 0
    while True:
        events, cursor = tel.poll_events("B", cursor)
        if not events:
            break
        collected.extend(events)
    ids = [e.event_id for e in collected]
    assert len(collected) == per_producer * 3
    assert ids == sorted(ids) and len(set(ids)) == len(ids)


# ---- speed dial ----

def test_speed_dial_more_than_nine_slots(tel):
    for slot in range(1, 11):
        tel.add_speed_dial("A", slot, "B", f"slot {slot}")
    entries = tel.list_speed_dial("A")
    assert len(entries) == 10
    assert [e.slot for e in entries] == list(range(1, 11))


def test_speed_dial_slot_taken(tel):
    tel.add_speed_dial("A", 1, "B", "b")
    with pytest.raises(errors.SlotTaken):
        tel.add_speed_dial("A", 1, "C", "c")


def test_speed_dial_remove(tel):
    tel.add_speed_dial("A", 1, "B", "b")
    tel.remove_speed_dial("A", 1)
    assert tel.list_speed_dial("A") == []


def test_speed_dial_unknown_target(tel):
    with pytest.raises(errors.UnknownUser):
        tel.add_speed_dial("A", 1, "nobody", "x")
