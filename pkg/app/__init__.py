# Coded-Cache - two-layer decentralized coded caching simulator and bound checker
__version__ = "1.0.0"
