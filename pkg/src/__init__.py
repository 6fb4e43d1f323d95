"""
This package contains the source code for the two-qubit spin state preparation toolkit.
"""
