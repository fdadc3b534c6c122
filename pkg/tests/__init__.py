"""Tests for the chain entanglement toolkit."""
