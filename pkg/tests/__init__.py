"""
This package contains the unit and integration tests for the two-qubit spin state preparation toolkit.
"""
