from ._ebind import *  # noqa: F401,F403
from ._ebind import __version__  # noqa: F401
