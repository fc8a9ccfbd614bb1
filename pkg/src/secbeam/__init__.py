"""Secrecy-rate simulator for hybrid-beamforming MIMO links under jamming and eavesdropping.

The pipeline: clustered geometric channels -> per-user projected gradient
ascent over constant-amplitude analog beamformers -> multi-user digital
precoding (ZF / MMSE / MRT) -> secrecy-rate and energy-efficiency metrics,
averaged over seeded Monte Carlo campaigns.
"""

__version__ = "0.1.0"
