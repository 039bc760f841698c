"""Dual certificates for higher-order Delsarte LP hierarchies."""
