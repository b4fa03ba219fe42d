# Interleaving vs true concurrency.
#
# P and Q have the same interleaving traces ({ab, ba}) but differ in
# causality: in P the second action waits for the first to finish.
from fractions import Fraction

from durcsp import syntax as S
from durcsp.config import initial_config
from durcsp.opsem import causal_tree, min_makespan, untimed_tree

durs = S.make_spec(S.Stop(), {"a": Fraction(2), "b": Fraction(3)})
P = initial_config(S.parse_process("a;b;stop + b;a;stop"))
Q = initial_config(S.parse_process("a;stop ||| b;stop"))


def show(tree, indent=""):
    for (causes, label, ev), kids in tree:
        cs = ",".join(f"e{c}" for c in causes)
        print(f"{indent}{{{cs}}} {label} e{ev}")
        show(kids, indent + "    ")


print("P:")
show(untimed_tree(causal_tree(P, durs)))
print("Q:")
show(untimed_tree(causal_tree(Q, durs)))

# so the earliest finishing time differs as well
print("makespan P:", min_makespan(P, durs))
print("makespan Q:", min_makespan(Q, durs))
