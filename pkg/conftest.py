"""
Shared pytest setup: put the tax engine on the import path
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), 'backend', 'tax-engine'))

collect_ignore_glob = ["examples/*"]
