"""Protocol runtime: datasets, wire messages, party services, storage, bench."""

from .dataset import Dataset, export_csv, ingest_csv, plaintext_knn, random_dataset
from .parties import (
    CloudService,
    DataOwnerService,
    LocalTransport,
    PartyServer,
    SocketTransport,
    encrypt_dataset,
    run_session,
)
from .wire import WireMessage, decode_message, encode_message

__all__ = [
    "Dataset",
    "ingest_csv",
    "export_csv",
    "plaintext_knn",
    "random_dataset",
    "WireMessage",
    "encode_message",
    "decode_message",
    "DataOwnerService",
    "CloudService",
    "LocalTransport",
    "SocketTransport",
    "PartyServer",
    "encrypt_dataset",
    "run_session",
]
