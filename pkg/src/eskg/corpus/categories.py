"""The closed ten-category scheme for support statements."""

from __future__ import annotations

from enum import Enum


class ESCategory(str, Enum):
    APP = "APP"
    SUP = "SUP"
    PRS = "PRS"
    ENC = "ENC"
    EMP = "EMP"
    PRA = "PRA"
    EMO = "EMO"
    BLA = "BLA"
    CON = "CON"
    REA = "REA"

    @property
    def title(self) -> str:
        return _TITLES[self]

    @property
    def description(self) -> str:
        return _DESCRIPTIONS[self]


_TITLES = {
    ESCategory.APP: "Appreciated",
    ESCategory.SUP: "Supported",
    ESCategory.PRS: "Praise",
    ESCategory.ENC: "Encouragement",
    ESCategory.EMP: "Empathy",
    ESCategory.PRA: "Practical Advice",
    ESCategory.EMO: "Emotional Advice",
    ESCategory.BLA: "Blameless",
    ESCategory.CON: "Consolation",
    ESCategory.REA: "Reassurance",
}

_DESCRIPTIONS = {
    ESCategory.APP: "Tells the child they matter to the people around them.",
    ESCategory.SUP: "Tells the child someone is on their side right now.",
    ESCategory.PRS: "Points out a good quality the child has shown.",
    ESCategory.ENC: "Urges the child on toward overcoming the situation.",
    ESCategory.EMP: "Names and accepts what the child is feeling.",
    ESCategory.PRA: "Offers a concrete thing the child could try.",
    ESCategory.EMO: "Suggests a way to handle the feeling itself.",
    ESCategory.BLA: "Makes clear the situation is not the child's fault.",
    ESCategory.CON: "Turns attention to a brighter side of the situation.",
    ESCategory.REA: "Promises that things will improve.",
}

CATEGORY_COUNT = len(ESCategory)
