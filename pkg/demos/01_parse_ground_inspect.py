"""
Parsing and grounding
=====================

Generate a small logistics instance, ground it, and poke at the result:
the fact table, the operator table, and the JSON interchange dump.
"""

import json

from metaplan import (custom_spec, domain_to_pddl, gen_logistics, ground,
                      problem_to_pddl, reachability_prune, task_to_json)

# A 2-city instance with one airplane: every package needs a truck leg,
# an air leg, or both.
spec = custom_spec("logistics", seed=42, cities=2, airplanes=1, trucks=2,
                   locations_per_city=2, packages=2)
domain, problem = gen_logistics(spec)

print(domain_to_pddl(domain))
print(problem_to_pddl(problem))

# Grounding instantiates every type-consistent binding of every schema.
task = ground(domain, problem)
print(f"facts:     {len(task.facts)}")
print(f"operators: {len(task.operators)}")
print(f"init size: {len(task.init)}, goal size: {len(task.goal)}")

# Facts and operators are dense, deterministic tables.
for fact in task.facts[:5]:
    print(f"  fact {fact.index}: {fact}")
for op in task.operators[:3]:
    print(f"  operator {op.id}: {op.name}")
    print(f"    pre={sorted(op.pre)} add={sorted(op.add)} "
          f"del={sorted(op.delete)}")

# Delete-relaxed reachability can only shrink the operator table, and on
# a well-formed instance it keeps everything useful.
pruned = reachability_prune(task)
print(f"after reachability pruning: {len(pruned.operators)} operators")

# The JSON dump is the interchange format consumed by external checkers.
dump = task_to_json(task)
print(json.dumps(dump, indent=2)[:400], "...")
