"""wwkde Tests"""
