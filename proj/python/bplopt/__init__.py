from ._bplopt import *  # noqa: F401,F403
