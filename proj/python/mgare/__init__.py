"""Zero-sum LQ game value analysis over fading channels."""

from ._mgare import *  # noqa: F401,F403
