# Refining an action by a process keeps bisimilar pairs bisimilar.
from fractions import Fraction

from durcsp import syntax as S
from durcsp.config import initial_config
from durcsp.equivalence import CheckParams, PreconditionError, refinement_preserved

params = CheckParams(max_depth=10, durations={"a": Fraction(1), "b": Fraction(2), "c": Fraction(1), "d": Fraction(3)})
body = S.parse_process("c;skip{0} ||| d;skip{0}")

pairs = [
    ("a;stop + a;stop", "a;stop"),
    ("a;stop ||| b;stop", "b;stop ||| a;stop"),
    ("a{1};b;stop", "a{1};b;stop"),
    ("a;b;stop + b;a;stop", "a;stop ||| b;stop"),  # not bisimilar to begin with
]
for p, q in pairs:
    cp, cq = initial_config(S.parse_process(p)), initial_config(S.parse_process(q))
    try:
        v = refinement_preserved(body, "a", cp, cq, params)
    except PreconditionError as exc:
        v = exc
    print(f"{p:22s} ~ {q:22s}: {v}")
