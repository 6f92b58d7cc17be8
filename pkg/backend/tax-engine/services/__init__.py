"""Scenario loading, reporting and verification services"""
