from .slide import SPLIT_NAMES, SlideDataset, TissueClass, VirtualSlide
