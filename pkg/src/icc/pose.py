"""BODY-25 keypoint handling: file parsing, pose triangles, pose lines.

The input format is the common 25-point skeleton JSON: per detected person a
flat array of 75 numbers (x, y, confidence for keypoints 0..24, in pixels of
the companion image). Undetected joints carry zeroed entries.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

from .errors import DegenerateGeometry, ParseError, SchemaError
from .geometry import Point

log = logging.getLogger(__name__)

NOSE = 0
NECK = 1
MID_HIP = 8

# Keypoint groups providing the three triangle corners: head/shoulder region,
# left leg, right leg.
TOP_GROUP = (0, 1, 2, 5, 15, 16, 17, 18)
LEFT_LEG_GROUP = (9, 10, 11, 22, 23, 24)
RIGHT_LEG_GROUP = (12, 13, 14, 19, 20, 21)

KEYPOINT_NAMES = (
    "Nose", "Neck", "RShoulder", "RElbow", "RWrist", "LShoulder", "LElbow",
    "LWrist", "MidHip", "RHip", "RKnee", "RAnkle", "LHip", "LKnee", "LAnkle",
    "REye", "LEye", "REar", "LEar", "LBigToe", "LSmallToe", "LHeel",
    "RBigToe", "RSmallToe", "RHeel",
)


@dataclass(frozen=True)
class Keypoint:
    x: float
    y: float
    confidence: float
    index: int

    @property
    def position(self) -> Point:
        return (self.x, self.y)

    def detected(self, min_confidence: float = 0.0) -> bool:
        return self.confidence > min_confidence


@dataclass(frozen=True)
class PersonPose:
    """One detected person: exactly 25 keypoints indexed 0..24."""

    keypoints: tuple[Keypoint, ...]

    def __post_init__(self):
        if len(self.keypoints) != 25:
            raise SchemaError(f"a person needs exactly 25 keypoints, got {len(self.keypoints)}")
        for i, kp in enumerate(self.keypoints):
            if kp.index != i:
                raise SchemaError(f"keypoint at slot {i} carries index {kp.index}")

    def keypoint(self, index: int) -> Keypoint:
        return self.keypoints[index]

    def detected_keypoints(self, min_confidence: float = 0.0) -> list[Keypoint]:
        return [kp for kp in self.keypoints if kp.detected(min_confidence)]


@dataclass(frozen=True)
class PoseTriangle:
    """Representative corner per keypoint group, with provenance."""

    top: Point
    left: Point
    right: Point
    source_indices: tuple[int, int, int]
    source_confidences: tuple[float, float, float]


@dataclass(frozen=True)
class PoseLine:
    """Body abstracted to one segment: triangle top to base midpoint."""

    a: Point
    b: Point
    person_id: int | None = None


def parse_keypoints(document: bytes | str) -> list[PersonPose]:
    """Parse a keypoint file into PersonPose entries, input order preserved.

    Persons whose 25 confidences are all <= 0 are dropped.
    """
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"keypoint file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("people"), list):
        raise SchemaError('keypoint file must be an object with a "people" array')

    poses: list[PersonPose] = []
    for slot, person in enumerate(doc["people"]):
        if not isinstance(person, dict):
            raise SchemaError(f"people[{slot}] is not an object")
        flat = person.get("pose_keypoints_2d")
        if not isinstance(flat, list) or len(flat) != 75:
            raise SchemaError(
                f"people[{slot}].pose_keypoints_2d must hold 75 numbers, "
                f"got {len(flat) if isinstance(flat, list) else type(flat).__name__}"
            )
        try:
            values = [float(v) for v in flat]
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"people[{slot}] contains a non-numeric entry") from exc
        kps = tuple(
            Keypoint(values[3 * i], values[3 * i + 1], values[3 * i + 2], i)
            for i in range(25)
        )
        if all(kp.confidence <= 0.0 for kp in kps):
            continue
        poses.append(PersonPose(kps))
    return poses


def serialize_keypoints(poses: list[PersonPose]) -> str:
    """Inverse of parse_keypoints, for fixtures and round-trip checks."""
    people = []
    for pose in poses:
        flat: list[float] = []
        for kp in pose.keypoints:
            flat.extend((kp.x, kp.y, kp.confidence))
        people.append({"pose_keypoints_2d": flat})
    return json.dumps({"people": people})


def _group_best(pose: PersonPose, group: tuple[int, ...], min_confidence: float) -> Keypoint | None:
    best: Keypoint | None = None
    for idx in group:
        kp = pose.keypoint(idx)
        if not kp.detected(min_confidence):
            continue
        if best is None or kp.confidence > best.confidence:
            best = kp
    return best


def triangle_corners(pose: PersonPose, min_confidence: float = 0.0) -> PoseTriangle | None:
    """Pick the highest-confidence keypoint of each corner group.

    Ties keep the lowest keypoint index. Returns None when any group has no
    detected member, or when the three winners collapse onto fewer than
    three distinct positions.
    """
    top = _group_best(pose, TOP_GROUP, min_confidence)
    left = _group_best(pose, LEFT_LEG_GROUP, min_confidence)
    right = _group_best(pose, RIGHT_LEG_GROUP, min_confidence)
    if top is None or left is None or right is None:
        return None
    corners = (top.position, left.position, right.position)
    if len(set(corners)) < 3:
        log.debug("triangle corners coincide, skipping person")
        return None
    return PoseTriangle(
        top=top.position,
        left=left.position,
        right=right.position,
        source_indices=(top.index, left.index, right.index),
        source_confidences=(top.confidence, left.confidence, right.confidence),
    )


def pose_line(triangle: PoseTriangle, person_id: int | None = None) -> PoseLine:
    """Segment from the triangle top to the midpoint of the leg corners."""
    mid = (
        0.5 * (triangle.left[0] + triangle.right[0]),
        0.5 * (triangle.left[1] + triangle.right[1]),
    )
    if mid == triangle.top:
        raise DegenerateGeometry("triangle top coincides with its base midpoint")
    return PoseLine(a=triangle.top, b=mid, person_id=person_id)
