try:
    from ._netpricing import *  # noqa: F401,F403
except ImportError:  # running against a build tree, not an installed package
    from _netpricing import *  # noqa: F401,F403
