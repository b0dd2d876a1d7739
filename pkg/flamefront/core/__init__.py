"""
Core numerics for the flame front laboratory.
"""
