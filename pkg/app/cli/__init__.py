"""Command-line front end (``wwkde``)"""
