"""gridshield: joint DDoS defense toolkit.

A discrete-event simulator and analytical companion for botnet campaigns
against a grid of cooperating defenders: attacker expense accounting,
attacker/defender population dynamics, an alarm-escalation control plane,
and traffic policing at the bottleneck link.
"""

__version__ = "0.1.0"
