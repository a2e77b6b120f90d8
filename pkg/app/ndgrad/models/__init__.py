from .node import Node, Tensor, to_tensor
