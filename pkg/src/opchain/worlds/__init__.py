from .abstract import AbstractStochasticWorld
from .base import WorldModel
from .kitchen import AdversaryEvent, KitchenWorld, select_grasp

__all__ = [
    "AbstractStochasticWorld",
    "AdversaryEvent",
    "KitchenWorld",
    "WorldModel",
    "select_grasp",
]
