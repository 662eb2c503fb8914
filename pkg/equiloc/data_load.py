"""
Paths of the data files shipped with equiloc.
"""

import os

datadir = os.path.join(os.path.dirname(__file__), "data")

# Scenario files (schema version 1), one JSON document per scenario id
SCENARIO_DIR = os.path.join(datadir, "scenarios")
SCENARIO_SUFFIX = ".json"
