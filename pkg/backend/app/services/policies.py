from abc import ABC, abstractmethod
from pathlib import Path
from typing import TYPE_CHECKING, Optional, Sequence

from app.core.errors import DecisionLogError, DiligenceViolation, PolicyNameError
from app.models.schemas import IDLE, Decision
from app.models.switch import SwitchConfig

if TYPE_CHECKING:
    from app.services.engine import QueueState

_MASK64 = (1 << 64) - 1


class XorShift64Star:
    """xorshift64* generator; the state is seeded through splitmix64 so seed 0 is usable."""

    def __init__(self, seed: int):
        z = (seed + 0x9E3779B97F4A7C15) & _MASK64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        self.state = (z ^ (z >> 31)) or 1

    def next(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & _MASK64
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK64

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection sampling."""
        limit = ((1 << 64) // bound) * bound
        while True:
            r = self.next()
            if r < limit:
                return r % bound


class Policy(ABC):
    """Send-chooser: picks which non-empty queue serves a send event."""

    name: str = "policy"
    deterministic: bool = True

    @abstractmethod
    def choose(self, config: SwitchConfig, state: "QueueState") -> Decision:
        ...

    def reset(self) -> None:
        """Called before every simulation run."""

    def on_idle(self, config: SwitchConfig, state: "QueueState") -> None:
        """Called at send events where every queue is empty."""

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


def greedy_choose(config: SwitchConfig, state: "QueueState") -> Decision:
    """Highest-valued non-empty queue; the lowest index among equal values."""
    best: Decision = IDLE
    best_value = 0
    values = config.queue_values
    for k, size in enumerate(state.occupancy):
        if size and values[k] > best_value:
            best, best_value = k, values[k]
    return best


def lowest_value_choose(config: SwitchConfig, state: "QueueState") -> Decision:
    best: Decision = IDLE
    best_value = None
    values = config.queue_values
    for k, size in enumerate(state.occupancy):
        if size and (best_value is None or values[k] < best_value):
            best, best_value = k, values[k]
    return best


class GreedyPolicy(Policy):
    name = "greedy"

    def choose(self, config: SwitchConfig, state: "QueueState") -> Decision:
        return greedy_choose(config, state)


class LowestValueFirstPolicy(Policy):
    name = "lowest-first"

    def choose(self, config: SwitchConfig, state: "QueueState") -> Decision:
        return lowest_value_choose(config, state)


class RoundRobinPolicy(Policy):
    name = "round-robin"

    def __init__(self):
        self._last = -1

    def reset(self) -> None:
        self._last = -1

    def choose(self, config: SwitchConfig, state: "QueueState") -> Decision:
        n = len(state.occupancy)
        for offset in range(1, n + 1):
            k = (self._last + offset) % n
            if state.occupancy[k]:
                self._last = k
                return k
        return IDLE


class SeededRandomPolicy(Policy):
    deterministic = False

    def __init__(self, seed: int):
        self.seed = seed
        self.name = f"random:{seed}"
        self._rng = XorShift64Star(seed)

    def reset(self) -> None:
        self._rng = XorShift64Star(self.seed)

    def choose(self, config: SwitchConfig, state: "QueueState") -> Decision:
        candidates = [k for k, size in enumerate(state.occupancy) if size]
        if not candidates:
            return IDLE
        return candidates[self._rng.below(len(candidates))]


class ReplayPolicy(Policy):
    """Re-executes a fixed decision log, one entry per send event."""

    def __init__(self, decision_log: Sequence[Decision], name: str = "replay"):
        self.decision_log = tuple(decision_log)
        self.name = name

    def _entry(self, step: int) -> Decision:
        if step > len(self.decision_log):
            raise DecisionLogError(f"decision log has {len(self.decision_log)} entries, step {step} needs one")
        return self.decision_log[step - 1]

    def choose(self, config: SwitchConfig, state: "QueueState") -> Decision:
        return self._entry(state.step)

    def on_idle(self, config: SwitchConfig, state: "QueueState") -> None:
        entry = self._entry(state.step)
        if entry != IDLE:
            raise DiligenceViolation(state.step, f"log sends from queue {entry} but every queue is empty")


POLICY_NAMES = ("greedy", "round-robin", "lowest-first", "random:<seed>", "replay:<logfile>")


def make_policy(name: str, seed: Optional[int] = None) -> Policy:
    """Build a fresh policy from its CLI name."""
    if name == "greedy":
        return GreedyPolicy()
    if name == "round-robin":
        return RoundRobinPolicy()
    if name == "lowest-first":
        return LowestValueFirstPolicy()
    if name == "random":
        return SeededRandomPolicy(seed if seed is not None else 0)
    if name.startswith("random:"):
        try:
            return SeededRandomPolicy(int(name.split(":", 1)[1]))
        except ValueError:
            raise PolicyNameError(f"bad seed in policy name {name!r}") from None
    if name.startswith("replay:"):
        from app.services.engine import parse_decision_log

        path = Path(name.split(":", 1)[1])
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise PolicyNameError(f"cannot read decision log {path}: {e}") from None
        return ReplayPolicy(parse_decision_log(text), name=name)
    raise PolicyNameError(f"unknown policy {name!r}; expected one of {', '.join(POLICY_NAMES)}")
