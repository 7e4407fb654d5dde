"""Record protocol transcripts for the web client's snapshot tests.

Run from the repository root (after installing the package):

    python3 frontend/record_fixtures.py

Each fixture is a list of {request, response} steps taken against the
live stdio protocol driver, so client snapshots stay pinned to actual
server behaviour.  tests/test_protocol.py replays the buffer transcript
to keep the two sides in sync.
"""

import json
import os
import pathlib
import tempfile

from itrees.protocol import ProtocolDriver

HERE = pathlib.Path(__file__).resolve().parent
FIXTURES = HERE / "fixtures"


def record(requests):
    driver = ProtocolDriver()
    steps = []
    for request in requests:
        steps.append({"request": request, "response": driver.handle(request)})
    return steps


def main():
    FIXTURES.mkdir(exist_ok=True)

    buffer_steps = record([
        {"cmd": "start", "model": "buffer", "target": "buffer"},
        {"cmd": "choose", "eventId": 1},
        {"cmd": "choose", "eventId": 2},
        {"cmd": "choose", "label": "State.[1, 2]"},
        {"cmd": "choose", "eventId": 99},          # rejected, state unchanged
    ])
    (FIXTURES / "buffer_transcript.json").write_text(
        json.dumps(buffer_steps, indent=2) + "\n")

    terminated_steps = record([
        {"cmd": "start", "model": "reverse", "target": "reverse",
         "args": [[1, 2, 3]]},
    ])
    (FIXTURES / "terminated_transcript.json").write_text(
        json.dumps(terminated_steps, indent=2) + "\n")

    halting = "channel a : {0..0}\nprocess halt = a -> stop\n"
    spinning = ("channel e : {0..0}\n"
                "process spin = (while true do e -> skip od) \\ {e}\n")
    with tempfile.TemporaryDirectory() as tmp:
        halt_path = os.path.join(tmp, "halt.itm")
        spin_path = os.path.join(tmp, "spin.itm")
        pathlib.Path(halt_path).write_text(halting)
        pathlib.Path(spin_path).write_text(spinning)
        deadlock_steps = record([
            {"cmd": "start", "model": halt_path, "target": "halt"},
            {"cmd": "choose", "eventId": 0},
        ])
        taulimit_steps = record([
            {"cmd": "start", "model": spin_path, "target": "spin"},
            {"cmd": "continue"},
        ])
    # model paths are machine-specific; strip them so fixtures stay stable
    for steps in (deadlock_steps, taulimit_steps):
        steps[0]["request"]["model"] = "<inline>"
    (FIXTURES / "deadlock_transcript.json").write_text(
        json.dumps(deadlock_steps, indent=2) + "\n")
    (FIXTURES / "taulimit_transcript.json").write_text(
        json.dumps(taulimit_steps, indent=2) + "\n")
    print(f"wrote fixtures to {FIXTURES}")


if __name__ == "__main__":
    main()
