"""Binary checkpoint format.

Layout, all integers little-endian:

    magic b"MDPO" | version u16 | header_length u32 | header JSON (UTF-8)
    | payload (raw float32 tensors) | crc32(payload) u32

The header carries the model config, the vocabulary token list, optimizer
scalars (or null), and a tensor directory of (name, shape, offset, length)
into the payload. Optimizer moments are stored as tensors named
"opt.m.<param>" and "opt.v.<param>". The header is serialized with sorted
keys, so identical contents give byte-identical files.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import torch

from ..errors import CheckpointMismatch, ChecksumMismatch, FormatVersionMismatch
from .adam import OptimizerState
from .transformer import ModelConfig, Parameters
from .vocab import Vocab

MAGIC = b"MDPO"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class CheckpointBundle:
    params: Parameters
    config: ModelConfig
    vocab: Vocab
    optimizer: Optional[OptimizerState]


def _tensor_bytes(tensor: torch.Tensor) -> bytes:
    array = tensor.detach().to(torch.float32).contiguous().numpy()
    return array.astype("<f4", copy=False).tobytes()


def save_checkpoint(
    path: Union[str, Path],
    params: Parameters,
    config: ModelConfig,
    vocab: Vocab,
    optimizer: Optional[OptimizerState] = None,
) -> None:
    named: List[Tuple[str, torch.Tensor]] = [
        (name, params[name]) for name in sorted(params)
    ]
    if optimizer is not None:
        named += [(f"opt.m.{name}", optimizer.m[name]) for name in sorted(optimizer.m)]
        named += [(f"opt.v.{name}", optimizer.v[name]) for name in sorted(optimizer.v)]

    directory = []
    chunks = []
    offset = 0
    for name, tensor in named:
        data = _tensor_bytes(tensor)
        directory.append(
            {
                "name": name,
                "shape": list(tensor.shape),
                "offset": offset,
                "length": len(data),
            }
        )
        chunks.append(data)
        offset += len(data)
    payload = b"".join(chunks)

    header = {
        "config": config.to_dict(),
        "vocab": list(vocab.tokens),
        "optimizer": None
        if optimizer is None
        else {
            "step": optimizer.step,
            "lr": optimizer.lr,
            "beta1": optimizer.beta1,
            "beta2": optimizer.beta2,
            "eps": optimizer.eps,
        },
        "tensors": directory,
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode(
        "utf-8"
    )

    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", FORMAT_VERSION))
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(payload)
        fh.write(struct.pack("<I", zlib.crc32(payload)))


def load_checkpoint(
    path: Union[str, Path], expect_vocab: Optional[Vocab] = None
) -> CheckpointBundle:
    blob = Path(path).read_bytes()
    if len(blob) < 10 or blob[:4] != MAGIC:
        raise FormatVersionMismatch(f"{path}: not a model checkpoint")
    (version,) = struct.unpack("<H", blob[4:6])
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch(
            f"{path}: format version {version}, expected {FORMAT_VERSION}"
        )
    (header_len,) = struct.unpack("<I", blob[6:10])
    header_end = 10 + header_len
    if len(blob) < header_end + 4:
        raise ChecksumMismatch(f"{path}: file shorter than its header declares")
    try:
        header = json.loads(blob[10:header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatVersionMismatch(f"{path}: unreadable header ({exc})") from exc

    payload = blob[header_end:-4]
    (stored_crc,) = struct.unpack("<I", blob[-4:])
    if zlib.crc32(payload) != stored_crc:
        raise ChecksumMismatch(f"{path}: payload checksum does not match")

    config = ModelConfig(**header["config"])
    vocab = Vocab(tokens=tuple(header["vocab"]))
    if expect_vocab is not None and vocab.tokens != expect_vocab.tokens:
        raise CheckpointMismatch(
            f"{path}: checkpoint vocabulary ({len(vocab)} tokens) does not "
            f"match the expected one ({len(expect_vocab)} tokens)"
        )

    tensors: Dict[str, torch.Tensor] = {}
    for entry in header["tensors"]:
        start, length = entry["offset"], entry["length"]
        if start + length > len(payload):
            raise ChecksumMismatch(f"{path}: tensor {entry['name']} overruns payload")
        array = np.frombuffer(payload[start : start + length], dtype="<f4")
        tensors[entry["name"]] = torch.from_numpy(
            array.reshape(entry["shape"]).copy()
        )

    params = {k: v for k, v in tensors.items() if not k.startswith("opt.")}
    optimizer = None
    if header["optimizer"] is not None:
        scalars = header["optimizer"]
        optimizer = OptimizerState(
            step=scalars["step"],
            lr=scalars["lr"],
            beta1=scalars["beta1"],
            beta2=scalars["beta2"],
            eps=scalars["eps"],
            m={k[len("opt.m.") :]: v for k, v in tensors.items() if k.startswith("opt.m.")},
            v={k[len("opt.v.") :]: v for k, v in tensors.items() if k.startswith("opt.v.")},
        )
    return CheckpointBundle(params=params, config=config, vocab=vocab, optimizer=optimizer)
