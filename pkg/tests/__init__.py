"""Test suite for the difference quotient workbench"""
