import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=int(os.environ.get("HYPOTHESIS_MAX_EXAMPLES", 30)),
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")
