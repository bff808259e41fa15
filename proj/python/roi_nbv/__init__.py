from ._roi_nbv import *  # noqa: F401,F403
from ._roi_nbv import __doc__  # noqa: F401
