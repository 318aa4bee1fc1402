"""Service Tests"""
