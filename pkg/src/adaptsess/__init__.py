"""Self-adaptive multiparty sessions: global types, monitors, processes,
typing, simulation and data-driven reconfiguration."""

__version__ = "0.1.0"
