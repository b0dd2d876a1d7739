"""
Snapshot rendering for the flame front laboratory.
"""
