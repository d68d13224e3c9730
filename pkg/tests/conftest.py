from hypothesis import settings

# One deterministic profile for the whole suite: reruns explore the same cases.
settings.register_profile("deterministic", derandomize=True, deadline=None)
settings.load_profile("deterministic")
