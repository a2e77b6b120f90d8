from .embedding import ViewOutputs
