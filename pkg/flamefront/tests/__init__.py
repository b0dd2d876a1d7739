"""
Test module for the flame front laboratory.
"""
