#
# Test module for sqcontrol.
#
# To run all tests, use ``python -m unittest discover`` from the repository
# root.
#
# To run a particular test, use e.g.
#  ``python -m unittest sqcontrol.tests.test_dynamics``.
#
# The acceptance runs on the full size grids are skipped unless the
# environment variable SQCONTROL_ACCEPTANCE is set.
#
