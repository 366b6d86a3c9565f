"""
Probabilistic group testing toolkit: pooling designs, the activation channel,
distance decoding and the test-count design procedure.
"""
