from .sampling import PairBatch, PatchCoord, SamplingMode
