"""
데이터셋 저장/로드

manifest.json (UTF-8) + 슬라이드별 바이너리 파일:
magic "CSSL", version/rows/cols/H/W/C (u32 LE), 패치 값 (f32 LE, 행 우선),
라벨 (u8, rows·cols개), 슬라이드 라벨 (u8).
"""
import json
import logging
import struct
from pathlib import Path
from typing import Dict, List

import numpy as np

from app.core.constants import SlideFileFormat
from app.core.exceptions import (
    BadMagicException,
    DataFormatException,
    TruncatedFileException,
    VersionMismatchException,
)
from app.slidegen.models.slide import SPLIT_NAMES, SlideDataset, TissueClass, VirtualSlide
from app.slidegen.services.slide_service import dataset_hash

logger = logging.getLogger(__name__)

HEADER_SIZE = struct.calcsize(SlideFileFormat.HEADER_STRUCT)


def slide_file_name(slide_id: int) -> str:
    return f"slide_{slide_id:06d}.cssl"


def encode_slide(slide: VirtualSlide) -> bytes:
    """슬라이드 1장을 바이너리로 직렬화"""
    height, width, channels = slide.patch_shape
    header = struct.pack(
        SlideFileFormat.HEADER_STRUCT,
        SlideFileFormat.MAGIC,
        SlideFileFormat.VERSION,
        slide.rows,
        slide.cols,
        height,
        width,
        channels,
    )
    patches = np.ascontiguousarray(slide.patches, dtype=SlideFileFormat.PATCH_DTYPE).tobytes()
    labels = np.ascontiguousarray(slide.labels, dtype=SlideFileFormat.LABEL_DTYPE).tobytes()
    return header + patches + labels + bytes([int(slide.slide_label)])


def decode_slide(payload: bytes, slide_id: int, source: str = "") -> VirtualSlide:
    """
    바이너리를 슬라이드로 역직렬화

    Raises:
        TruncatedFileException: 헤더가 잘렸거나 본문 길이가 헤더와 다를 때
        BadMagicException: 매직 바이트가 "CSSL"이 아닐 때
        VersionMismatchException: 지원하지 않는 버전
        DataFormatException: 라벨 값이 TissueClass 범위를 벗어날 때
    """
    details = {"file": source, "slide_id": slide_id}
    if len(payload) < len(SlideFileFormat.MAGIC):
        raise TruncatedFileException(f"매직 바이트보다 짧은 파일입니다 ({len(payload)} bytes): {source}",
                                     details={**details, "actual": len(payload)})
    if payload[:4] != SlideFileFormat.MAGIC:
        raise BadMagicException(details=details)
    if len(payload) < HEADER_SIZE:
        raise TruncatedFileException(f"헤더가 잘렸습니다 ({len(payload)} bytes): {source}", details=details)

    _, version, rows, cols, height, width, channels = struct.unpack_from(SlideFileFormat.HEADER_STRUCT, payload)
    if version != SlideFileFormat.VERSION:
        raise VersionMismatchException(
            f"지원하지 않는 슬라이드 파일 버전입니다: {version} (지원: {SlideFileFormat.VERSION})",
            details={**details, "version": version},
        )

    cell_count = rows * cols
    patch_values = cell_count * height * width * channels
    expected = HEADER_SIZE + patch_values * 4 + cell_count + 1
    if len(payload) != expected:
        raise TruncatedFileException(
            f"헤더 크기로 계산한 길이({expected})와 파일 길이({len(payload)})가 다릅니다: {source}",
            details={**details, "expected": expected, "actual": len(payload)},
        )

    offset = HEADER_SIZE
    patches = np.frombuffer(payload, dtype=SlideFileFormat.PATCH_DTYPE, count=patch_values, offset=offset)
    offset += patch_values * 4
    labels = np.frombuffer(payload, dtype=SlideFileFormat.LABEL_DTYPE, count=cell_count, offset=offset)
    slide_label = payload[-1]

    if (labels.size and int(labels.max()) > TissueClass.MALIGNANT) or slide_label > TissueClass.MALIGNANT:
        raise DataFormatException(f"라벨 값이 0/1/2 범위를 벗어났습니다: {source}", details=details)

    return VirtualSlide(
        slide_id=slide_id,
        patches=patches.astype(np.float32).reshape(rows, cols, height, width, channels),
        labels=labels.astype(np.uint8).reshape(rows, cols),
        slide_label=TissueClass(slide_label),
    )


def _class_counts(slides: List[VirtualSlide]) -> Dict[str, int]:
    counts = {tissue.name.lower(): 0 for tissue in TissueClass}
    for slide in slides:
        counts[slide.slide_label.name.lower()] += 1
    return counts


def save_dataset(dataset: SlideDataset, path: Path) -> Path:
    """
    데이터셋을 디렉터리에 저장

    Returns:
        manifest 경로
    """
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)

    splits = {}
    for split_name, slides in dataset.splits().items():
        entries = []
        for slide in slides:
            file_name = slide_file_name(slide.slide_id)
            (path / file_name).write_bytes(encode_slide(slide))
            entries.append({"slide_id": slide.slide_id, "file": file_name})
        splits[split_name] = entries

    patch_shape = dataset.patch_shape
    first = next(dataset.all_slides(), None)
    manifest = {
        "version": SlideFileFormat.MANIFEST_VERSION,
        "dataset_id": dataset.dataset_id,
        "dims": {
            "rows": first.rows if first else None,
            "cols": first.cols if first else None,
            "patch_height": patch_shape[0] if patch_shape else None,
            "patch_width": patch_shape[1] if patch_shape else None,
            "channels": patch_shape[2] if patch_shape else None,
        },
        "class_counts": {name: _class_counts(slides) for name, slides in dataset.splits().items()},
        "splits": splits,
        "gen_config": dataset.gen_config,
        "dataset_hash": dataset_hash(dataset),
    }
    manifest_path = path / SlideFileFormat.MANIFEST_NAME
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, ensure_ascii=False, indent=2)

    logger.info(f"데이터셋 저장: {manifest_path} ({sum(len(v) for v in splits.values())}장)")
    return manifest_path


def load_dataset(path: Path) -> SlideDataset:
    """
    save_dataset으로 저장한 데이터셋 로드

    Raises:
        DataFormatException: manifest가 없거나 형식이 다를 때 (세부 오류는 decode_slide 참고)
    """
    path = Path(path)
    manifest_path = path / SlideFileFormat.MANIFEST_NAME if path.is_dir() else path
    if not manifest_path.exists():
        raise DataFormatException(f"manifest를 찾을 수 없습니다: {manifest_path}")
    try:
        with open(manifest_path, "r", encoding="utf-8") as f:
            manifest = json.load(f)
    except json.JSONDecodeError as e:
        raise DataFormatException(f"manifest JSON 형식 오류: {e}")

    if manifest.get("version") != SlideFileFormat.MANIFEST_VERSION:
        raise VersionMismatchException(f"지원하지 않는 manifest 버전입니다: {manifest.get('version')}")

    root = manifest_path.parent
    splits: Dict[str, List[VirtualSlide]] = {}
    for split_name in SPLIT_NAMES:
        slides = []
        for entry in manifest.get("splits", {}).get(split_name, []):
            file_path = root / entry["file"]
            if not file_path.exists():
                raise DataFormatException(f"슬라이드 파일이 없습니다: {file_path}")
            slides.append(decode_slide(file_path.read_bytes(), int(entry["slide_id"]), str(file_path)))
        splits[split_name] = slides

    dataset = SlideDataset(dataset_id=manifest["dataset_id"], gen_config=manifest.get("gen_config"), **splits)
    logger.info(f"데이터셋 로드: {dataset.dataset_id}")
    return dataset
