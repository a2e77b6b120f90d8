from .transform import Transform
