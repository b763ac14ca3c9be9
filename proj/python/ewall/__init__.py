"""Online lifelong learning over shared representations.

Thin package wrapper around the compiled extension. The extension lives next
to this file in an installed wheel, or on PYTHONPATH when running against an
in-tree CMake build.
"""

try:
    from ._ewall import *  # noqa: F401,F403
    from ._ewall import __doc__  # noqa: F401
except ImportError:  # in-tree build: extension sits on PYTHONPATH
    from _ewall import *  # noqa: F401,F403
    from _ewall import __doc__  # noqa: F401
