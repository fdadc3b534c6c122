"""
Root pytest configuration.

Puts the project root on sys.path so that core, utils and cli import the same
way under pytest, unittest discovery and direct execution of a test file.
"""

import os
import sys

PROJECT_ROOT = os.path.abspath(os.path.dirname(__file__))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)
