"""Leader-follower controller synthesis with intermittent communication.

A leader with absolute sensing services followers that navigate on dead
reckoning.  Servicing cadence (dwell-time conditions) and the leader's
practical constraints are expressed as metric temporal logic over sampled
positions; control inputs come from a receding-horizon sequence of MILPs,
and the closed loop is simulated and monitored against the specification.
"""

__version__ = "0.1.0"
