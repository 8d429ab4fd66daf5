"""
Parallel versus sequential planning
===================================

The breadth-first oracle finds optimal-makespan plans. Enabling degree-2
meta-actions can only shorten the makespan, and with two arms it often
halves blocksworld plans outright.
"""

from metaplan import (bfs_solve, custom_spec, gen_multiblocks, ground,
                      parallelism_rate, parse_domain, parse_problem,
                      plan_to_text)
from metaplan.generators import MULTIBLOCKS_DOMAIN

# Two independent towers: four sequential steps, two parallel ones.
problem_text = """\
(define (problem two-towers)
  (:domain multiblocks)
  (:objects a b c d - block arm1 arm2 - arm)
  (:init (ontable a) (ontable b) (ontable c) (ontable d)
         (clear a) (clear b) (clear c) (clear d)
         (handempty arm1) (handempty arm2))
  (:goal (and (on a b) (on c d)))
)
"""
task = ground(parse_domain(MULTIBLOCKS_DOMAIN),
              parse_problem(problem_text))

sequential = bfs_solve(task, 1, 10)
parallel = bfs_solve(task, 2, 10)
print(f"sequential makespan: {sequential.timesteps}")
print(plan_to_text(task, sequential))
print(f"parallel makespan:   {parallel.timesteps} "
      f"(parallelism rate {parallelism_rate(parallel):.3f})")
print(plan_to_text(task, parallel))

# The improvement holds (weakly) across random instances.
print("makespans on random 3-block 2-arm instances (L=1 vs L=2):")
for seed in range(8):
    domain, problem = gen_multiblocks(
        custom_spec("multiblocks", seed=seed, blocks=3, arms=2))
    t = ground(domain, problem)
    seq = bfs_solve(t, 1, 20)
    par = bfs_solve(t, 2, 20)
    marker = "<" if par.timesteps < seq.timesteps else "="
    print(f"  seed {seed}: {seq.timesteps} -> {par.timesteps}  ({marker})")
