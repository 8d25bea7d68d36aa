"""Hand-crafted radiomic features: first-order, shape and five texture families."""

from .catalog import CATALOG, FAMILIES, FeatureVector, catalog_names, render_catalog
from .config import ExtractionConfig
from .extract import extract_all
from .firstorder import first_order_features
from .shape import shape_features
from .texture import (
    glcm_features,
    glcm_matrices,
    gldm_features,
    gldm_matrix,
    glrlm_features,
    glrlm_matrices,
    glszm_features,
    glszm_matrix,
    ngtdm_features,
    ngtdm_table,
)

__all__ = [
    "CATALOG",
    "FAMILIES",
    "ExtractionConfig",
    "FeatureVector",
    "catalog_names",
    "extract_all",
    "first_order_features",
    "glcm_features",
    "glcm_matrices",
    "gldm_features",
    "gldm_matrix",
    "glrlm_features",
    "glrlm_matrices",
    "glszm_features",
    "glszm_matrix",
    "ngtdm_features",
    "ngtdm_table",
    "render_catalog",
    "shape_features",
]
