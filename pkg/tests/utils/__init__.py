"""Tests for configuration, validation and output writers."""
