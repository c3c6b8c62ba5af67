"""
Reference external agent for the arena protocol.

Replies depend only on the request line, so replaying a recorded request
stream reproduces the recorded replies. Modes:

    first         play the first legal move
    invalid       always play 999
    invalid-once  play 999 on the first attempt, then the first legal move
    garbage-once  reply with non-JSON on the first attempt, then the first legal move
    silent        acknowledge init, then never answer a move request
    exit          exit before acknowledging init
"""
import argparse
import json
import sys

MODES = ("first", "invalid", "invalid-once", "garbage-once", "silent", "exit")
INVALID_MOVE = 999


def _reply(record: dict) -> None:
    sys.stdout.write(json.dumps(record, sort_keys=True) + "\n")
    sys.stdout.flush()


def answer(mode: str, request: dict):
    """The reply line for one move request, or None to stay silent."""
    legal = request["legal_moves"]
    first_attempt = request.get("reprompt", 0) == 0
    if mode == "silent":
        return None
    if mode == "invalid" or (mode == "invalid-once" and first_attempt):
        return json.dumps({"type": "move", "action": INVALID_MOVE}, sort_keys=True)
    if mode == "garbage-once" and first_attempt:
        return "I choose the middle square"
    return json.dumps({"type": "move", "action": legal[0]}, sort_keys=True)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Echo agent speaking the arena line protocol.")
    parser.add_argument("--mode", choices=MODES, default="first")
    args = parser.parse_args(argv)

    for line in sys.stdin:
        if not line.strip():
            continue
        record = json.loads(line)
        if record.get("type") == "init":
            if args.mode == "exit":
                return 0
            _reply({"type": "ready"})
        elif record.get("type") == "move_request":
            reply = answer(args.mode, record)
            if reply is not None:
                sys.stdout.write(reply + "\n")
                sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
