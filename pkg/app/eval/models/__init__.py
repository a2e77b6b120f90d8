from .classifier import Bag, EvalResult, MILParams, ProbeParams
