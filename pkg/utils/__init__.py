"""
Configuration, validation and output writers for the chain entanglement tools.
"""
