"""Smoke test for the conpole_py client.

Build and install the extension first:

    cargo build --release --bin conpole
    pip install --no-build-isolation ./crates/python
    CONPOLE_BIN=target/release/conpole python3 python/smoke_test.py
"""

import gc
import json
import os
import random
import signal
import subprocess
import sys

import conpole_py
from conpole_py import EnvClient, PolicyError, ServiceError

ENVS = ["equations", "fractions", "ternary-addition", "sorting", "multiplication", "rubiks-cube"]
BIN = os.environ.get("CONPOLE_BIN", os.path.join(os.path.dirname(__file__), "..", "target", "release", "conpole"))


def gone(pid):
    """True once the process is reaped; zombies and live children count as orphans."""
    return not os.path.exists(f"/proc/{pid}")


def runs(state):
    return [len(r) for r in state.strip("[]").split("|")]


def inversions(state):
    xs = runs(state)
    return sum(1 for i in range(len(xs)) for j in range(i + 1, len(xs)) if xs[i] > xs[j])


def oracle(state, actions):
    return min(range(len(actions)), key=lambda i: inversions(actions[i][1]))


def check_parity(rng):
    pairs = [(rng.choice(ENVS), rng.randrange(10**6)) for _ in range(1000)]
    clients = {e: EnvClient(e, BIN) for e in ENVS}
    lines, raw = [], []
    for env, seed in pairs:
        state = clients[env].generate(seed)
        cli = subprocess.run([BIN, "gen", env, "--seed", str(seed), "--count", "1"],
                             capture_output=True, text=True, check=True).stdout
        assert cli == f"{seed}\t{state}\n", (env, seed, cli, state)
        line = json.dumps({"cmd": "expand", "env": env, "state": state}, separators=(",", ":"))
        lines.append(line)
        raw.append(clients[env].request_raw(line))
        solved, actions = clients[env].expand(state)
        assert isinstance(solved, bool) and all(len(a) == 2 for a in actions)
    direct = subprocess.run([BIN, "serve"], input="\n".join(lines) + "\n",
                            capture_output=True, text=True, check=True).stdout.splitlines()
    assert direct == raw
    pids = [c.pid for c in clients.values()]
    for c in clients.values():
        c.close()
    assert all(gone(p) for p in pids)
    print("parity: 1000 generate/expand pairs match the CLI")


def check_rollouts():
    with EnvClient("sorting", BIN) as client:
        for seed in range(100):
            trace = client.rollout(oracle, seed)
            last = trace.splitlines()[-1].split(" | ")[0].removesuffix(" =>")
            assert client.is_solved(last), trace
        assert client.rollout(oracle, 3, max_depth=0) == client.generate(3)
        try:
            client.rollout(lambda s, a: 1 / 0, 3)
        except PolicyError as e:
            assert isinstance(e.__cause__, ZeroDivisionError) and "state" in str(e)
        else:
            raise AssertionError("policy error swallowed")
    print("rollout: inversion oracle solves 100/100 sorting seeds")


def check_errors():
    client = EnvClient("sorting", BIN)
    try:
        client.expand("[=|x]")
    except ServiceError as e:
        assert "rejected" in str(e)
    else:
        raise AssertionError("malformed state accepted")
    assert client.expand("[=|==]") == (True, [])
    batch = client.expand_batch(["[==|=]", "nope"])
    assert batch[0][0] is False and isinstance(batch[1], ServiceError)
    pid = client.pid
    os.kill(pid, signal.SIGKILL)
    try:
        client.generate(1)
    except ServiceError as e:
        assert "exited" in str(e), e
    else:
        raise AssertionError("dead subprocess not reported")
    del client
    gc.collect()
    assert gone(pid)
    try:
        EnvClient("chess", BIN)
    except ServiceError:
        pass
    else:
        raise AssertionError("unknown environment accepted")
    print("errors: structured, client usable afterwards, no orphaned subprocesses")


def main():
    assert os.path.exists(BIN), f"conpole binary not found at {BIN}"
    print(f"conpole_py from {conpole_py.__file__}")
    rng = random.Random(0)
    check_parity(rng)
    check_rollouts()
    check_errors()
    print("ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
