from . import evaluators
