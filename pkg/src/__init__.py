# src/__init__.py

from . import utils
from . import rng
from . import problems
from . import estimators
from . import diagnostics
from . import optim
from . import experiments
