"""rulebench: multi-objective evaluation toolkit for driving trajectories.

Monitors formalized driving rules with quantitative violation scores,
ranks trajectories under prioritized hierarchical rulebooks, tunes
rulebook priorities and rule parameters against labeled preference data,
selects representative scenario coresets, and falsifies driving agents
inside a built-in deterministic kinematic simulator.
"""

__version__ = "0.1.0"
