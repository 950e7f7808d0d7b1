"""Hybrid spatial reasoning: scene simulation, relation grounding, answer set
reasoning, ROI attention, a small neural learner and axiom induction."""

__version__ = "0.1.0"
