"""Post Canonical Systems: productions, forward derivation and recognition.

Strings are tuples of symbols.  A production's sides mix fixed symbols with
variables written ``$``, ``$1``, ``$2`` and so on; a variable may stand for the
empty string.  Nondeterminism is expanded breadth-first with repeated strings
merged.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .patterns import data_path

String = tuple[str, ...]
Bindings = tuple[tuple[str, String], ...]

_VAR_RE = re.compile(r"^\$\d*$")


class PcsError(ValueError):
    """A production or system breaks its structural rules."""


class AlphabetError(PcsError):
    """A string uses a symbol outside the system's alphabet."""


class PcsFormatError(PcsError):
    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


def is_variable(token: str) -> bool:
    return bool(_VAR_RE.match(token))


def as_string(s: str | Iterable[str]) -> String:
    return tuple(s.split()) if isinstance(s, str) else tuple(s)


def text(s: Sequence[str]) -> str:
    return " ".join(s)


@dataclass(frozen=True)
class Production:
    lhs: tuple[str, ...]
    rhs: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "lhs", as_string(self.lhs))
        object.__setattr__(self, "rhs", as_string(self.rhs))
        if not self.lhs:
            raise PcsError("a production needs a non-empty left side")
        lvars = [t for t in self.lhs if is_variable(t)]
        if len(set(lvars)) != len(lvars):
            raise PcsError(f"repeated variable on the left of {self.text}")
        unknown = sorted({t for t in self.rhs if is_variable(t)} - set(lvars))
        if unknown:
            raise PcsError(f"{self.text}: right side uses unbound {' '.join(unknown)}")

    @classmethod
    def parse(cls, rule: str) -> "Production":
        lhs, sep, rhs = rule.partition("->")
        if not sep:
            raise PcsError(f"production {rule.strip()!r} has no '->'")
        return cls(tuple(lhs.split()), tuple(rhs.split()))

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(t for t in self.lhs if is_variable(t))

    @property
    def fixed_symbols(self) -> set[str]:
        return {t for t in self.lhs + self.rhs if not is_variable(t)}

    @property
    def is_normal_form(self) -> bool:
        """True for ``g $ -> $ h`` with one variable, g and h fixed."""
        lv = [k for k, t in enumerate(self.lhs) if is_variable(t)]
        rv = [k for k, t in enumerate(self.rhs) if is_variable(t)]
        return (
            len(lv) == 1
            and lv[0] == len(self.lhs) - 1
            and rv == [0]
            and self.rhs[0] == self.lhs[-1]
        )

    @property
    def text(self) -> str:
        return f"{text(self.lhs)} -> {text(self.rhs)}".rstrip()


def substitute(side: Sequence[str], bindings: Mapping[str, String] | Bindings) -> String:
    env = dict(bindings)
    out: list[str] = []
    for t in side:
        out.extend(env[t] if is_variable(t) else (t,))
    return tuple(out)


def match_side(side: Sequence[str], s: Sequence[str]) -> list[Bindings]:
    """Every binding of the variables in *side* that makes it equal *s*.

    A variable may occur more than once; all occurrences must agree.  Results
    are ordered by the length of the earliest variables, shortest first.
    """
    s = tuple(s)
    out: list[Bindings] = []
    env: dict[str, String] = {}
    order: list[str] = []

    # fixed symbols still to come bound how much of s a variable may take
    fixed_after = [0] * (len(side) + 1)
    for k in range(len(side) - 1, -1, -1):
        fixed_after[k] = fixed_after[k + 1] + (0 if is_variable(side[k]) else 1)

    def go(k: int, pos: int):
        if k == len(side):
            if pos == len(s):
                out.append(tuple((v, env[v]) for v in order))
            return
        t = side[k]
        if not is_variable(t):
            if pos < len(s) and s[pos] == t:
                go(k + 1, pos + 1)
            return
        if t in env:
            val = env[t]
            if s[pos : pos + len(val)] == val:
                go(k + 1, pos + len(val))
            return
        for end in range(pos, len(s) - fixed_after[k + 1] + 1):
            env[t] = s[pos:end]
            order.append(t)
            go(k + 1, end)
            order.pop()
            del env[t]

    go(0, 0)
    return out


def match_production(p: Production, s: Sequence[str]) -> list[Bindings]:
    if not s:
        return []
    return match_side(p.lhs, s)


@dataclass(frozen=True)
class DerivationStep:
    input: String
    production: Production
    bindings: Bindings
    output: String

    def describe(self) -> str:
        binds = "; ".join(f"{v}={text(val) or '(empty)'}" for v, val in self.bindings)
        return f"{self.production.text}" + (f" [{binds}]" if binds else "")


@dataclass(frozen=True)
class PcsSystem:
    alphabet: tuple[str, ...]
    axioms: tuple[String, ...]
    productions: tuple[Production, ...]

    def __post_init__(self):
        if not self.alphabet:
            raise PcsError("the alphabet is empty")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise PcsError("the alphabet lists a symbol twice")
        if not self.axioms:
            raise PcsError("a system needs at least one axiom")
        if not self.productions:
            raise PcsError("a system needs at least one production")
        allowed = set(self.alphabet)
        looks_bound = sorted(t for t in allowed if is_variable(t))
        if looks_bound:
            raise PcsError(f"alphabet symbol {looks_bound[0]!r} looks like a variable")
        for ax in self.axioms:
            if not ax:
                raise PcsError("an axiom is empty")
            stray = [t for t in ax if t not in allowed]
            if stray:
                raise AlphabetError(f"axiom {text(ax)!r} uses {stray[0]!r}, not in the alphabet")
        for p in self.productions:
            stray = sorted(p.fixed_symbols - allowed)
            if stray:
                raise AlphabetError(f"production {p.text!r} uses {stray[0]!r}, not in the alphabet")

    def check(self, s: Sequence[str]) -> String:
        allowed = set(self.alphabet)
        for t in s:
            if t not in allowed:
                raise AlphabetError(f"symbol {t!r} is not in the alphabet")
        return tuple(s)

    @property
    def is_normal_form(self) -> bool:
        return all(p.is_normal_form for p in self.productions)


def step(system: PcsSystem, s: Sequence[str]) -> list[DerivationStep]:
    """Every production application to *s*, in production then binding order."""
    s = system.check(s)
    out = []
    for p in system.productions:
        for b in match_production(p, s):
            out.append(DerivationStep(s, p, b, substitute(p.rhs, b)))
    return out


# ---------------------------------------------------------------------------
# forward runs


class Termination(str, Enum):
    QUIESCENT = "quiescent"  # no production applies
    REPEAT = "repeat"  # every successor was produced earlier
    DEPTH_LIMIT = "depth-limit"
    STRING_LIMIT = "string-limit"


@dataclass(frozen=True)
class DerivationNode:
    string: String
    depth: int
    via: DerivationStep | None  # the step that first produced this string


@dataclass
class Derivation:
    root: String
    nodes: dict[String, DerivationNode] = field(default_factory=dict)
    children: dict[String, list[String]] = field(default_factory=dict)
    terminated: dict[String, Termination] = field(default_factory=dict)

    @property
    def strings(self) -> list[String]:
        """All strings, the root included, in discovery order."""
        return list(self.nodes)

    def level(self, depth: int) -> list[String]:
        return [s for s, n in self.nodes.items() if n.depth == depth]

    @property
    def quiescent(self) -> list[String]:
        return [s for s, why in self.terminated.items() if why is Termination.QUIESCENT]

    @property
    def depth(self) -> int:
        return max(n.depth for n in self.nodes.values())

    def render(self) -> str:
        lines = []

        def walk(s: String, indent: int):
            node = self.nodes[s]
            label = text(s) or "(empty)"
            if node.via is not None:
                label += f"   <- {node.via.describe()}"
            why = self.terminated.get(s)
            if why is not None:
                label += f"   ({why.value})"
            lines.append("  " * indent + label)
            for c in self.children.get(s, ()):
                walk(c, indent + 1)

        walk(self.root, 0)
        return "\n".join(lines) + "\n"


def run(system: PcsSystem, start: Sequence[str], max_steps: int, max_strings: int = 10_000) -> Derivation:
    """Breadth-first derivation from *start*, at most *max_steps* deep and
    *max_strings* strings in all."""
    if max_steps < 1 or max_strings < 1:
        raise ValueError("limits must be at least 1")
    root = system.check(start)
    d = Derivation(root)
    d.nodes[root] = DerivationNode(root, 0, None)
    frontier = deque([root])
    while frontier:
        s = frontier.popleft()
        node = d.nodes[s]
        if node.depth >= max_steps:
            if step(system, s):
                d.terminated[s] = Termination.DEPTH_LIMIT
            else:
                d.terminated[s] = Termination.QUIESCENT
            continue
        steps = step(system, s)
        if not steps:
            d.terminated[s] = Termination.QUIESCENT
            continue
        kids = []
        clipped = False
        for st in steps:
            if st.output in d.nodes:
                continue
            if len(d.nodes) >= max_strings:
                clipped = True
                break
            d.nodes[st.output] = DerivationNode(st.output, node.depth + 1, st)
            kids.append(st.output)
            frontier.append(st.output)
        if kids:
            d.children[s] = kids
        elif clipped:
            d.terminated[s] = Termination.STRING_LIMIT
        else:
            d.terminated[s] = Termination.REPEAT
    return d


def generate(system: PcsSystem, max_steps: int, max_strings: int = 10_000) -> list[String]:
    """Strings derivable from the axioms within *max_steps*, axioms included,
    without repeats, in discovery order."""
    seen: dict[String, None] = {}
    for ax in system.axioms:
        for s in run(system, ax, max_steps, max_strings).strings:
            seen.setdefault(s, None)
    return list(seen)


# ---------------------------------------------------------------------------
# recognition


@dataclass(frozen=True)
class Recognition:
    accepted: bool
    chain: tuple[String, ...]  # from the input back to an axiom when accepted
    steps: tuple[DerivationStep, ...]  # forward steps, axiom first

    @property
    def reverse_steps(self) -> int:
        return len(self.steps)


def unstep(system: PcsSystem, s: Sequence[str]) -> list[DerivationStep]:
    """Forward steps that could have produced *s*.

    Productions whose left side has a variable missing from the right side
    cannot be reversed and are skipped.
    """
    s = tuple(s)
    out = []
    for p in system.productions:
        if set(p.variables) - {t for t in p.rhs if is_variable(t)}:
            continue
        for b in match_side(p.rhs, s):
            env = dict(b)
            prev = substitute(p.lhs, env)
            if prev:
                out.append(DerivationStep(prev, p, tuple((v, env[v]) for v in p.variables), s))
    return out


def recognize(system: PcsSystem, s: Sequence[str], max_steps: int) -> Recognition:
    """Run the productions backwards from *s* until an axiom is reached."""
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    s = system.check(s)
    axioms = set(system.axioms)
    back: dict[String, DerivationStep | None] = {s: None}
    depth = {s: 0}
    queue = deque([s])
    while queue:
        cur = queue.popleft()
        if cur in axioms:
            steps = []
            chain = [cur]
            while back[chain[-1]] is not None:
                st = back[chain[-1]]
                steps.append(st)
                chain.append(st.output)
            return Recognition(True, tuple(reversed(chain)), tuple(steps))
        if depth[cur] >= max_steps:
            continue
        for st in unstep(system, cur):
            if st.input not in back:
                back[st.input] = st
                depth[st.input] = depth[cur] + 1
                queue.append(st.input)
    return Recognition(False, (), ())


# ---------------------------------------------------------------------------
# text form and the worked systems


def parse_pcs(source: str) -> PcsSystem:
    alphabet: tuple[str, ...] | None = None
    axioms: list[String] = []
    productions: list[Production] = []
    for line_no, raw in enumerate(source.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("//"):
            continue
        head, sep, body = line.partition(":")
        if not sep:
            raise PcsFormatError(f"expected 'alphabet:', 'axiom:' or 'rule:', got {line!r}", line_no)
        head = head.strip()
        try:
            if head == "alphabet":
                if alphabet is not None:
                    raise PcsFormatError("second alphabet line", line_no)
                alphabet = tuple(body.split())
            elif head == "axiom":
                if not body.split():
                    raise PcsFormatError("empty axiom", line_no)
                axioms.append(tuple(body.split()))
            elif head == "rule":
                productions.append(Production.parse(body))
            else:
                raise PcsFormatError(f"unknown directive {head!r}", line_no)
        except PcsFormatError:
            raise
        except PcsError as exc:
            raise PcsFormatError(str(exc), line_no) from None
    if alphabet is None:
        raise PcsFormatError("no alphabet line")
    return PcsSystem(alphabet, tuple(axioms), tuple(productions))


def load_pcs(path: str | Path) -> PcsSystem:
    return parse_pcs(Path(path).read_text(encoding="utf-8"))


def render_pcs(system: PcsSystem) -> str:
    lines = [f"alphabet: {text(system.alphabet)}"]
    lines += [f"axiom: {text(a)}" for a in system.axioms]
    lines += [f"rule: {p.text}" for p in system.productions]
    return "\n".join(lines) + "\n"


def rotation_system() -> PcsSystem:
    return load_pcs(data_path("rotation.pcs"))


def unary_system() -> PcsSystem:
    return load_pcs(data_path("unary.pcs"))


def palindrome_system(literal: bool = False) -> PcsSystem:
    return load_pcs(data_path("palindrome_literal.pcs" if literal else "palindrome.pcs"))

