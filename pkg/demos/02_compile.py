# Compile a small process to a timed causal transition system and run it.
from durcsp import constraints as K
from durcsp import tcts as T
from durcsp.corpus import load

spec = load("fig31")
m = T.compile(spec)
print(T.to_text(m))
print("diagnostics:", T.validate_cts(m))

# the second guard pins b to exactly 104 time units after a started
t_a, t_b = m.transitions
print("b enabled after a for delays in", K.enabling_window(t_b.guard, {0: 0}))

rc = T.initial_run(m)
rc = T.step_action(rc, t_a, m.durations)
for wait in (103, 1):
    rc = T.step_delay(rc, wait)
    err = T.can_fire(rc, t_b, m.durations)
    print(f"t={rc.now}: fire b ->", "ok" if err is None else err)
rc = T.step_action(rc, t_b, m.durations)
print("final state", rc.state)

with open("fig31.dot", "w") as f:
    f.write(T.to_dot(m))
print("wrote fig31.dot")
