"""
Configuration input for the flame front laboratory.
"""
