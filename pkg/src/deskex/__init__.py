"""deskex: desk-scale hybrid exchange with a deterministic matching core,
a best-effort agent trade server, and a simulated network/fault environment."""

__version__ = "0.1.0"
