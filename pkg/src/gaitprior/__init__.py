"""gaitprior: hierarchical motion-prior locomotion lab.

Library + CLI for periodic motion representation learning, low-level
imitation pre-training, high-level residual goal-reaching policies, and
teacher-student distillation on a desk-scale quadruped simulator.
"""

__version__ = "0.1.0"
