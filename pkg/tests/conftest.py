import os

from hypothesis import HealthCheck, settings

# quick by default; HYPOTHESIS_PROFILE=thorough runs 10^5 examples per property
settings.register_profile("default", max_examples=300, deadline=None)
settings.register_profile("thorough", max_examples=100_000, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_terminal_summary(terminalreporter):
    import sys
    for name, mod in list(sys.modules.items()):
        if name.endswith("test_acceptance") and getattr(mod, "RESULTS", None):
            terminalreporter.section("acceptance")
            for k in sorted(mod.RESULTS):
                terminalreporter.write_line(mod.RESULTS[k])
