"""forumflux: temporal community churn analysis for forum corpora.

Pipeline: parse posts -> fixed-width snapshot windows -> thread
co-participation graphs -> propinquity-dynamics communities -> cross-snapshot
role labels (Joining/Previous/Leaving/Staying) -> 18-feature vectors ->
logistic-regression churn models under Monte Carlo cross-validation.
"""

__version__ = "0.1.0"
