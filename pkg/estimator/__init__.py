"""
Estimators for the summand density of compound sums
"""
