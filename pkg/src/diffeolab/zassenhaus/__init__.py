"""Theorem engines: flattening, interval transport, derivative collisions and
the wreath-product counterexample pair."""

from .collision import CollisionParams, CollisionReport, derivative_collision_search
from .flatten import (FlattenParams, FlattenReport, choose_case,
                      find_escape_word, flatten, pigeonhole_bound)
from .transport import TransportParams, TransportReport, interval_transport_search
from .wreath import (WreathNormalForm, WreathPair, build_wreath_pair,
                     wreath_normal_form)

__all__ = [
    "CollisionParams", "CollisionReport", "derivative_collision_search",
    "FlattenParams", "FlattenReport", "choose_case", "find_escape_word",
    "flatten", "pigeonhole_bound",
    "TransportParams", "TransportReport", "interval_transport_search",
    "WreathNormalForm", "WreathPair", "build_wreath_pair", "wreath_normal_form",
]
