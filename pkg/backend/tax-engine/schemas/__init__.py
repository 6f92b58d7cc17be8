"""Pydantic documents for scenario files and reports"""
