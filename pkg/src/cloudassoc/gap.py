"""Generalized assignment instances for user-to-cloud association.

Clouds and users are indexed from 0 inside the library. An assignment is a
length-U tuple whose entries are a cloud index or ``None`` (unassigned).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "InvalidInputError",
    "InstanceTooLargeError",
    "InstanceFormatError",
    "GapInstance",
    "Assignment",
    "ObjectiveReport",
    "evaluate",
    "brute_force_optimum",
    "read_instance",
    "write_instance",
    "parse_instance",
    "format_instance",
    "random_instance",
]

DEFAULT_ENUMERATION_CAP = 10**7

Assignment = tuple  # tuple[Optional[int], ...], one slot per user


class InvalidInputError(ValueError):
    pass


class InstanceTooLargeError(ValueError):
    pass


class InstanceFormatError(InvalidInputError):
    """Malformed instance file. ``lineno`` is 1-based, or None at EOF."""

    def __init__(self, message: str, lineno: Optional[int] = None):
        self.lineno = lineno
        where = f"line {lineno}: " if lineno is not None else "end of file: "
        super().__init__(where + message)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GapInstance:
    rewards: np.ndarray      # (C, U) float64, r_cu >= 0
    weights: np.ndarray      # (C, U) int64, alpha_cu >= 1
    capacities: np.ndarray   # (C,) int64, K_c >= 1
    num_clouds: int = field(init=False)
    num_users: int = field(init=False)

    def __post_init__(self):
        r = np.array(self.rewards, dtype=np.float64)
        if r.ndim != 2 or r.shape[0] < 1 or r.shape[1] < 1:
            raise InvalidInputError(f"rewards must be a non-empty C x U matrix, got shape {r.shape}")
        C, U = r.shape
        w_raw = np.asarray(self.weights)
        if w_raw.shape != (C, U):
            raise InvalidInputError(f"weights shape {w_raw.shape} does not match rewards {r.shape}")
        if not np.all(np.equal(np.mod(w_raw, 1), 0)):
            raise InvalidInputError("weights must be integers")
        w = w_raw.astype(np.int64)
        k_raw = np.asarray(self.capacities).reshape(-1)
        if k_raw.shape != (C,):
            raise InvalidInputError(f"capacities length {k_raw.shape[0]} does not match C={C}")
        if not np.all(np.equal(np.mod(k_raw, 1), 0)):
            raise InvalidInputError("capacities must be integers")
        k = k_raw.astype(np.int64)
        if not np.all(np.isfinite(r)):
            raise InvalidInputError("rewards must be finite")
        if np.any(r < 0):
            raise InvalidInputError("rewards must be non-negative")
        if np.any(w < 1):
            raise InvalidInputError("weights must be >= 1")
        if np.any(k < 1):
            raise InvalidInputError("capacities must be >= 1")
        object.__setattr__(self, "rewards", _frozen(r))
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "capacities", _frozen(k))
        object.__setattr__(self, "num_clouds", C)
        object.__setattr__(self, "num_users", U)

    @classmethod
    def unit(cls, rewards, capacity) -> "GapInstance":
        """Instance with all weights 1 and a common (or per-cloud) capacity."""
        r = np.asarray(rewards, dtype=np.float64)
        caps = np.broadcast_to(np.asarray(capacity), (r.shape[0],))
        return cls(r, np.ones(r.shape, dtype=np.int64), caps)

    def __eq__(self, other):
        if not isinstance(other, GapInstance):
            return NotImplemented
        return (np.array_equal(self.rewards, other.rewards)
                and np.array_equal(self.weights, other.weights)
                and np.array_equal(self.capacities, other.capacities))

    __hash__ = None


@dataclass(frozen=True)
class ObjectiveReport:
    value: float
    feasible: bool
    per_cloud_load: tuple


def _check_assignment(instance: GapInstance, assignment: Sequence[Optional[int]]) -> None:
    if len(assignment) != instance.num_users:
        raise InvalidInputError(
            f"assignment has {len(assignment)} entries, instance has {instance.num_users} users")
    for u, c in enumerate(assignment):
        if c is not None and not (0 <= c < instance.num_clouds):
            raise InvalidInputError(f"user {u} assigned to unknown cloud {c}")


def evaluate(instance: GapInstance, assignment: Sequence[Optional[int]]) -> ObjectiveReport:
    _check_assignment(instance, assignment)
    load = [0] * instance.num_clouds
    value = 0.0
    for u, c in enumerate(assignment):
        if c is None:
            continue
        value += float(instance.rewards[c, u])
        load[c] += int(instance.weights[c, u])
    feasible = all(load[c] <= instance.capacities[c] for c in range(instance.num_clouds))
    return ObjectiveReport(value, feasible, tuple(load))


def brute_force_optimum(instance: GapInstance, cap: int = DEFAULT_ENUMERATION_CAP,
                        chunk: int = 1 << 16) -> tuple:
    """Exhaustive optimum over all (C+1)^U assignments.

    Ties go to the lexicographically smallest assignment vector, with
    "unassigned" ordered before cloud 0. Returns ``(assignment, value)``.
    """
    C, U = instance.num_clouds, instance.num_users
    total = (C + 1) ** U
    if total > cap:
        raise InstanceTooLargeError(f"(C+1)^U = {total} exceeds enumeration cap {cap}")

    # slot 0 = unassigned, slot c+1 = cloud c
    r = np.hstack([np.zeros((U, 1)), instance.rewards.T])
    w = np.hstack([np.zeros((U, 1), dtype=np.int64), instance.weights.T])
    radix = (C + 1) ** np.arange(U - 1, -1, -1, dtype=np.int64)
    users = np.arange(U)

    best_value = -math.inf
    best_code = 0
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = (codes[:, None] // radix[None, :]) % (C + 1)
        value = r[users, digits].sum(axis=1)
        ok = np.ones(len(codes), dtype=bool)
        wd = w[users, digits]
        for c in range(C):
            load = np.where(digits == c + 1, wd, 0).sum(axis=1)
            ok &= load <= instance.capacities[c]
        value = np.where(ok, value, -math.inf)
        i = int(np.argmax(value))
        if value[i] > best_value:
            best_value = float(value[i])
            best_code = int(codes[i])

    digits = [(best_code // int(radix[u])) % (C + 1) for u in range(U)]
    assignment = tuple(None if d == 0 else d - 1 for d in digits)
    return assignment, evaluate(instance, assignment).value


def random_instance(rng: np.random.Generator, num_clouds: int, num_users: int,
                    capacity_range=(1, 3), weight_range=(1, 2),
                    reward_range=(0.0, 10.0)) -> GapInstance:
    """Uniform random instance; integer ranges are inclusive."""
    r = rng.uniform(*reward_range, size=(num_clouds, num_users))
    w = rng.integers(weight_range[0], weight_range[1] + 1, size=(num_clouds, num_users))
    k = rng.integers(capacity_range[0], capacity_range[1] + 1, size=num_clouds)
    return GapInstance(r, w, k)


# -- text format ------------------------------------------------------------
#
#   # comment
#   C U
#   <C rows of U rewards>
#   <C rows of U integer weights>
#   <1 row of C integer capacities>

def format_instance(instance: GapInstance) -> str:
    lines = [f"{instance.num_clouds} {instance.num_users}", "# rewards"]
    lines += [" ".join(repr(float(x)) for x in row) for row in instance.rewards]
    lines.append("# weights")
    lines += [" ".join(str(int(x)) for x in row) for row in instance.weights]
    lines.append("# capacities")
    lines.append(" ".join(str(int(x)) for x in instance.capacities))
    return "\n".join(lines) + "\n"


def _content_lines(lines: Iterable[str]):
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if text:
            yield lineno, text.split()


def parse_instance(text: str) -> GapInstance:
    rows = _content_lines(text.splitlines())

    def take(n_fields: int, what: str, conv):
        try:
            lineno, fields = next(rows)
        except StopIteration:
            raise InstanceFormatError(f"missing {what}") from None
        if len(fields) != n_fields:
            raise InstanceFormatError(f"{what}: expected {n_fields} fields, got {len(fields)}", lineno)
        try:
            return lineno, [conv(f) for f in fields]
        except ValueError:
            raise InstanceFormatError(f"{what}: cannot parse {fields!r}", lineno) from None

    lineno, (C, U) = take(2, "header 'C U'", int)
    if C < 1 or U < 1:
        raise InstanceFormatError("header: C and U must be positive", lineno)
    rewards = [take(U, f"reward row {c + 1}", float)[1] for c in range(C)]
    weights = [take(U, f"weight row {c + 1}", int)[1] for c in range(C)]
    lineno, caps = take(C, "capacity row", int)
    extra = next(rows, None)
    if extra is not None:
        raise InstanceFormatError("unexpected trailing content", extra[0])
    try:
        return GapInstance(np.array(rewards), np.array(weights), np.array(caps))
    except InvalidInputError as exc:
        raise InstanceFormatError(str(exc), lineno) from None


def read_instance(path) -> GapInstance:
    with open(path) as fh:
        return parse_instance(fh.read())


def write_instance(instance: GapInstance, path_or_file) -> None:
    if hasattr(path_or_file, "write"):
        path_or_file.write(format_instance(instance))
        return
    with open(path_or_file, "w") as fh:
        fh.write(format_instance(instance))
