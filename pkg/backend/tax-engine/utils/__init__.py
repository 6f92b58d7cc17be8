"""Logging, configuration, errors and numerical helpers"""
