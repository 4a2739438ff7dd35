"""advscene: closed-loop adversarial highway scenario generation.

Stage 1 rolls out instruction-conditioned plans through a plan/assess/revise
loop; stage 2 regenerates the multi-vehicle trajectories with an anchor- and
rule-guided diffusion sampler trained on naturalistic highway data.
"""

__version__ = "0.1.0"
