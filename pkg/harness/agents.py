"""
Agents that can sit at a match seat.

Every agent follows the same session shape: ``start(spec, seed)`` once per
match, ``choose(env)`` whenever it is to move, ``close()`` at the end.
Internal agents only ever pick from ``env.valid_moves()``; external agents
are re-prompted on illegal replies and fault once the budget is spent.
"""
import queue
import shlex
import subprocess
import sys
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, TextIO, Tuple

from engine.core_env import ContractError, GameSpec
from harness import protocol
from rl.checkpoint import load_checkpoint_file
from rl.mcts import DEFAULT_ROLLOUTS, RolloutTally, search
from rl.network import PolicyParams, greedy_action, policy_distribution
from runtime.rng import SplitMix64, derive_seed, sample_index

DEFAULT_MAX_REPROMPTS = 3
DEFAULT_MOVE_TIMEOUT = 120.0
INIT_TIMEOUT = 30.0
QUIT_WORDS = ("q", "quit", "exit")


class AgentFault(RuntimeError):
    def __init__(self, message: str, attempts: int = 0):
        super().__init__(message)
        self.attempts = attempts


class AgentLaunchError(RuntimeError):
    """The agent process could not be spawned at all."""


class MatchAborted(RuntimeError):
    pass


@dataclass
class MoveRequest:
    board: str
    legal_moves: List[int]
    reprompt: int = 0

    def __post_init__(self):
        if not self.legal_moves:
            raise ContractError("move request needs at least one legal move")


def choose_random(valid: Sequence[int], rng: SplitMix64) -> int:
    if not valid:
        raise ContractError("valid move list is empty")
    return int(rng.choice(list(valid)))


def choose_policy(params: PolicyParams, obs, valid: Sequence[int], rng: SplitMix64, greedy: bool = True) -> int:
    probs = policy_distribution(params, obs, valid)
    if greedy:
        return greedy_action(probs)
    return sample_index(probs, rng)


class Agent:
    kind = "agent"

    def __init__(self):
        self.spec: Optional[GameSpec] = None
        self.rng = SplitMix64(0)
        self.seed = 0
        self.last_reprompts = 0

    @property
    def descriptor(self) -> str:
        return self.kind

    def start(self, spec: GameSpec, seed: int) -> None:
        self.spec = spec
        self.seed = seed
        self.rng = SplitMix64(seed)

    def choose(self, env) -> int:
        raise NotImplementedError

    def close(self) -> None:
        pass


class RandomAgent(Agent):
    kind = "random"

    def choose(self, env) -> int:
        return choose_random(env.valid_moves(), self.rng)


class _CheckpointAgent(Agent):
    def __init__(self, params: PolicyParams, source: str = ""):
        super().__init__()
        self.params = params
        self.source = source

    @property
    def descriptor(self) -> str:
        return f"{self.kind}:{self.source}" if self.source else self.kind

    def start(self, spec: GameSpec, seed: int) -> None:
        if (self.params.obs_dim, self.params.n_actions) != (spec.observation_dim, spec.action_space_size):
            raise ContractError(
                f"checkpoint {self.source or '<params>'} has dims ({self.params.obs_dim}, {self.params.n_actions}); "
                f"game {spec.id} needs ({spec.observation_dim}, {spec.action_space_size})"
            )
        super().start(spec, seed)


class PolicyAgent(_CheckpointAgent):
    kind = "policy"

    def __init__(self, params: PolicyParams, source: str = "", greedy: bool = True):
        super().__init__(params, source)
        self.greedy = greedy

    def choose(self, env) -> int:
        return choose_policy(self.params, env.observation(), env.valid_moves(), self.rng, greedy=self.greedy)


class MCTSAgent(_CheckpointAgent):
    kind = "mcts"

    def __init__(self, params: PolicyParams, source: str = "", n_rollouts: int = DEFAULT_ROLLOUTS, move_cap: int = 100):
        super().__init__(params, source)
        self.n_rollouts = n_rollouts
        self.move_cap = move_cap
        self.last_tally: Optional[RolloutTally] = None

    def choose(self, env) -> int:
        action, self.last_tally = search(
            self.params,
            env,
            n_rollouts=self.n_rollouts,
            seed=derive_seed(self.seed, env.move_count),
            move_cap=self.move_cap,
        )
        return action


class HumanAgent(Agent):
    """Console player: shows the turn prompt with move labels and re-asks until a legal number is typed."""

    kind = "human"

    def __init__(self, stdin: Optional[TextIO] = None, stdout: Optional[TextIO] = None):
        super().__init__()
        self.stdin = stdin or sys.stdin
        self.stdout = stdout or sys.stdout

    def _write(self, text: str) -> None:
        self.stdout.write(text + "\n")
        self.stdout.flush()

    def choose(self, env) -> int:
        legal = env.valid_moves()
        labels = self.spec.action_labels() if self.spec else {}
        self._write(protocol.turn_prompt(env.render(), legal))
        for move in legal:
            self._write(f"  {move}: {labels.get(move, '')}".rstrip())
        self.last_reprompts = 0
        while True:
            self.stdout.write("> ")
            self.stdout.flush()
            line = self.stdin.readline()
            if line == "":
                raise MatchAborted("input closed")
            if line.strip().lower() in QUIT_WORDS:
                raise MatchAborted("player quit")
            choice = protocol.parse_console_move(line, legal)
            if choice is not None:
                return choice
            self.last_reprompts += 1
            self._write(f"Not a legal move: {line.strip()!r}. Legal moves: {protocol.format_legal_moves(legal)}")


_EOF = None


class ExternalAgent(Agent):
    """Child process speaking the newline-delimited JSON protocol on stdin/stdout."""

    kind = "external"

    def __init__(
        self,
        command: str,
        max_reprompts: int = DEFAULT_MAX_REPROMPTS,
        move_timeout: float = DEFAULT_MOVE_TIMEOUT,
        init_timeout: float = INIT_TIMEOUT,
    ):
        super().__init__()
        self.command = command
        self.max_reprompts = max_reprompts
        self.move_timeout = move_timeout
        self.init_timeout = init_timeout
        self.process: Optional[subprocess.Popen] = None
        self.lines: "queue.Queue[Optional[str]]" = queue.Queue()
        self.transcript: List[Tuple[str, str]] = []

    @property
    def descriptor(self) -> str:
        return f"external:{self.command}"

    def _reader(self, stream: TextIO) -> None:
        for line in iter(stream.readline, ""):
            self.lines.put(line)
        self.lines.put(_EOF)

    def _send(self, record: Dict) -> None:
        line = protocol.encode_record(record)
        self.transcript.append(("send", line))
        try:
            self.process.stdin.write(line)
            self.process.stdin.flush()
        except (BrokenPipeError, OSError, ValueError) as exc:
            raise AgentFault(f"agent closed its input: {exc}") from exc

    def _receive(self, timeout: float) -> str:
        try:
            line = self.lines.get(timeout=timeout)
        except queue.Empty as exc:
            raise AgentFault(f"no reply within {timeout:g}s") from exc
        if line is _EOF:
            self.lines.put(_EOF)
            raise AgentFault("agent exited")
        self.transcript.append(("recv", line))
        return line

    def start(self, spec: GameSpec, seed: int) -> None:
        super().start(spec, seed)
        argv = shlex.split(self.command)
        if not argv:
            raise AgentLaunchError("empty external agent command")
        try:
            self.process = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise AgentLaunchError(f"cannot start {self.command!r}: {exc}") from exc
        threading.Thread(target=self._reader, args=(self.process.stdout,), daemon=True).start()
        try:
            self._send(protocol.init_record(spec))
            protocol.parse_ready(self._receive(self.init_timeout))
        except (AgentFault, protocol.ProtocolError) as exc:
            self.close()
            raise AgentFault(f"{self.command!r} failed the init exchange: {exc}", attempts=1) from exc

    def request(self, request: MoveRequest) -> int:
        """One exchange; raises ProtocolError for an unparseable reply."""
        self._send(protocol.move_request_record(request.board, request.legal_moves, request.reprompt))
        return protocol.parse_move(self._receive(self.move_timeout))

    def choose(self, env) -> int:
        if self.process is None:
            raise ContractError("external agent used before start()")
        board = env.render()
        legal = env.valid_moves()
        attempts = 1 + self.max_reprompts
        for reprompt in range(attempts):
            try:
                action = self.request(MoveRequest(board, legal, reprompt))
            except protocol.ProtocolError:
                continue
            except AgentFault as exc:
                raise AgentFault(str(exc), attempts=reprompt + 1) from exc
            if action in legal:
                self.last_reprompts = reprompt
                return action
        raise AgentFault(f"no legal move after {attempts} attempts", attempts=attempts)

    def close(self) -> None:
        if self.process is None:
            return
        process, self.process = self.process, None
        try:
            process.stdin.close()
        except OSError:
            pass
        try:
            process.wait(timeout=5)
        except subprocess.TimeoutExpired:
            process.kill()
            process.wait()


def replay_transcript(command: str, transcript: Sequence[Tuple[str, str]], timeout: float = INIT_TIMEOUT) -> List[str]:
    """Send the recorded outgoing lines to a fresh process and collect one reply per line."""
    agent = ExternalAgent(command, move_timeout=timeout)
    agent.process = subprocess.Popen(
        shlex.split(command), stdin=subprocess.PIPE, stdout=subprocess.PIPE, stderr=subprocess.DEVNULL, text=True, encoding="utf-8", bufsize=1
    )
    threading.Thread(target=agent._reader, args=(agent.process.stdout,), daemon=True).start()
    replies = []
    try:
        for direction, line in transcript:
            if direction != "send":
                continue
            agent.process.stdin.write(line)
            agent.process.stdin.flush()
            replies.append(agent._receive(timeout))
    finally:
        agent.close()
    return replies


@dataclass
class AgentSpec:
    """Parsed ``random | policy:<ckpt> | mcts:<ckpt> | external:<command> | human`` spec."""

    kind: str
    arg: str = ""
    n_rollouts: int = DEFAULT_ROLLOUTS
    move_cap: int = 100
    max_reprompts: int = DEFAULT_MAX_REPROMPTS
    move_timeout: float = DEFAULT_MOVE_TIMEOUT
    _params: Optional[PolicyParams] = field(default=None, repr=False)

    @property
    def descriptor(self) -> str:
        return f"{self.kind}:{self.arg}" if self.arg else self.kind

    def params(self) -> PolicyParams:
        if self._params is None:
            self._params, _ = load_checkpoint_file(self.arg)
        return self._params

    def build(self) -> Agent:
        if self.kind == "random":
            return RandomAgent()
        if self.kind == "policy":
            return PolicyAgent(self.params(), source=self.arg)
        if self.kind == "mcts":
            return MCTSAgent(self.params(), source=self.arg, n_rollouts=self.n_rollouts, move_cap=self.move_cap)
        if self.kind == "external":
            return ExternalAgent(self.arg, max_reprompts=self.max_reprompts, move_timeout=self.move_timeout)
        if self.kind == "human":
            return HumanAgent()
        raise ContractError(f"unknown agent kind {self.kind!r}")


AGENT_KINDS = ("random", "policy", "mcts", "external", "human")


def parse_agent_spec(text: str, **options) -> AgentSpec:
    kind, _, arg = text.strip().partition(":")
    if kind not in AGENT_KINDS:
        raise ContractError(f"unknown agent spec {text!r}; expected one of {', '.join(AGENT_KINDS)}")
    if kind in ("policy", "mcts", "external") and not arg:
        raise ContractError(f"agent spec {text!r} needs an argument after ':'")
    if kind in ("random", "human") and arg:
        raise ContractError(f"agent spec {text!r} takes no argument")
    return AgentSpec(kind=kind, arg=arg, **options)


def tally_note(agent: Agent) -> str:
    tally = getattr(agent, "last_tally", None)
    return f"winning rollouts per move: {tally.summary()}" if tally is not None else ""
