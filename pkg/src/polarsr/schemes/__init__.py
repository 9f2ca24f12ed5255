"""The four codecs built from :mod:`polarsr.schemes.layer`."""

from .design import ROLES, ConstructionPolicy, SchemeSource, construct_scheme, layer_specs
from .layer import (
    EncodedLayer,
    LayerCodeSpec,
    LayerRole,
    decode_layer,
    encode_layer,
    mismatches,
    reproduce,
)
from .rd import rd_roundtrip
from .record import CSV_COLUMNS, TrialRecord
from .sr import rimoldi_operating_point, sr_decode, sr_encode, sr_roundtrip
from .srwz import check_srwz_source, srwz_roundtrip
from .wz import wz_roundtrip

__all__ = [
    "ROLES", "ConstructionPolicy", "SchemeSource", "construct_scheme", "layer_specs",
    "EncodedLayer", "LayerCodeSpec", "LayerRole", "decode_layer", "encode_layer",
    "mismatches", "reproduce", "rd_roundtrip", "CSV_COLUMNS", "TrialRecord",
    "rimoldi_operating_point", "sr_decode", "sr_encode", "sr_roundtrip",
    "check_srwz_source", "srwz_roundtrip", "wz_roundtrip",
]
