"""Run file for the bilinear Schroedinger optimal control toolkit.

usage: python run.py solve $PATH_TO_CONFIG$
       python run.py verify $PATH_TO_CONFIG$ $PATH_TO_CONTROL_CSV$
       python run.py check $PATH_TO_CONFIG$ --which=all
"""

import sys

from sqcontrol.cli import main

sys.exit(main())
