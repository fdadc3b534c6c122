"""Integration tests for the chain entanglement command line tools."""
