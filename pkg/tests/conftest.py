import os
import sys

from hypothesis import settings, HealthCheck

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("forge", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow], derandomize=True)
settings.load_profile("forge")
