# The compiled model against the operational semantics, and two negative
# controls with replayable counterexamples.
import random
import time
from fractions import Fraction

from durcsp import syntax as S
from durcsp import tcts as T
from durcsp.config import initial_config
from durcsp.corpus import load_corpus, sidecar
from durcsp.equivalence import CheckParams, ConfigSpace, config_bisimilar, replay, tau_bisimilar
from durcsp.generate import random_specs

for name, spec in load_corpus():
    m = T.compile(spec, max_depth=sidecar(name).get("compile_depth", 64))
    print(f"{name:10s} {len(m.states):3d} states  {tau_bisimilar(m, spec, CheckParams(max_depth=T.longest_path(m) + 1))}")

t0 = time.perf_counter()
specs = random_specs(seed=random.Random(1).randrange(10**6), n=50)
verdicts = [tau_bisimilar(T.compile(s), s, CheckParams(max_depth=12)) for s in specs]
print(f"50 random specs: {sum(v.within_bounds for v in verdicts)} bisimilar within bounds, {time.perf_counter() - t0:.1f}s")

params = CheckParams(durations={"a": Fraction(2), "b": Fraction(3)})
p = initial_config(S.parse_process("a;b;stop + b;a;stop"))
q = initial_config(S.parse_process("a;stop ||| b;stop"))
v = config_bisimilar(p, q, params)
print(v)
space = ConfigSpace(params.durations)
print("replays:", replay(v.counterexample, space, space, p, q))
