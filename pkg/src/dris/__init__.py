"""DRIS: a three-layer federated search fabric.

Leaf (organization) nodes index full documents; mid (sub-Internet) nodes
harvest child metadata into union indexes; the top (country) broker stores
only collection descriptions and routes queries by collection selection,
fan-out, and result fusion.
"""

from .broker import BrokerNode
from .clock import SimClock, SystemClock
from .errors import DrisError
from .harvest import HarvestNode, HarvestSchedule
from .models import (
    CollectionDescription,
    Document,
    HarvestBatch,
    HarvestReport,
    Hit,
    MergedHit,
    MergedResult,
    MetadataRecord,
    ResultList,
)
from .naming import DomainName, Layer, NodeRegistry, class_name, layer_of, parse_domain, resource_class, service_url
from .org import OrgNode, documents_from_directory
from .service import create_app
from .sim import FULL_DOWNLOAD, METADATA_HARVEST, Metrics, SimConfig, compare_strategies, gen_corpus, run_sim
from .transport import DrisClient, HttpTransport, LocalTransport

__version__ = "0.1.0"

__all__ = [
    "BrokerNode",
    "CollectionDescription",
    "Document",
    "DomainName",
    "DrisClient",
    "DrisError",
    "FULL_DOWNLOAD",
    "HarvestBatch",
    "HarvestNode",
    "HarvestReport",
    "HarvestSchedule",
    "Hit",
    "HttpTransport",
    "Layer",
    "LocalTransport",
    "MergedHit",
    "MergedResult",
    "MetadataRecord",
    "METADATA_HARVEST",
    "Metrics",
    "NodeRegistry",
    "OrgNode",
    "ResultList",
    "SimClock",
    "SimConfig",
    "SystemClock",
    "class_name",
    "compare_strategies",
    "create_app",
    "documents_from_directory",
    "gen_corpus",
    "layer_of",
    "parse_domain",
    "resource_class",
    "run_sim",
    "service_url",
]
