"""
Post-processing of flame runs: free boundary geometry and asymptotic measurements.
"""
