from .encoder import EncodedBatch, EncoderDims, EncoderParams, PretrainResult
