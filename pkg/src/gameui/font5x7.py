"""Embedded 5x7 bitmap font for deterministic text rasterization.

Each printable ASCII glyph is a 7-row bitmap of 5 columns, written as a
``|``-separated row string where ``#`` marks an inked pixel. Glyphs outside
the table fall back to a filled box. Legibility, not typography, is the
goal: golden-image tests require bit-exact output on every platform.
"""

from __future__ import annotations

import numpy as np

GLYPH_WIDTH = 5
GLYPH_HEIGHT = 7

_RAW = {
    " ": "     |     |     |     |     |     |     ",
    "!": "  #  |  #  |  #  |  #  |  #  |     |  #  ",
    '"': " # # | # # |     |     |     |     |     ",
    "#": " # # | # # |#####| # # |#####| # # | # # ",
    "$": "  #  | ####|# #  | ### |  # #|#### |  #  ",
    "%": "##   |##  #|   # |  #  | #   |#  ##|   ##",
    "&": " ##  |#  # |# #  | #   |# # #|#  # | ## #",
    "'": "  #  |  #  |     |     |     |     |     ",
    "(": "   # |  #  | #   | #   | #   |  #  |   # ",
    ")": " #   |  #  |   # |   # |   # |  #  | #   ",
    "*": "     | # # |  #  |#####|  #  | # # |     ",
    "+": "     |  #  |  #  |#####|  #  |  #  |     ",
    ",": "     |     |     |     |  ## |  #  | #   ",
    "-": "     |     |     |#####|     |     |     ",
    ".": "     |     |     |     |     |  ## |  ## ",
    "/": "     |    #|   # |  #  | #   |#    |     ",
    "0": " ### |#   #|#  ##|# # #|##  #|#   #| ### ",
    "1": "  #  | ##  |  #  |  #  |  #  |  #  | ### ",
    "2": " ### |#   #|    #|   # |  #  | #   |#####",
    "3": "#####|   # |  #  |   # |    #|#   #| ### ",
    "4": "   # |  ## | # # |#  # |#####|   # |   # ",
    "5": "#####|#    |#### |    #|    #|#   #| ### ",
    "6": "  ## | #   |#    |#### |#   #|#   #| ### ",
    "7": "#####|    #|   # |  #  | #   | #   | #   ",
    "8": " ### |#   #|#   #| ### |#   #|#   #| ### ",
    "9": " ### |#   #|#   #| ####|    #|   # | ##  ",
    ":": "     |  ## |  ## |     |  ## |  ## |     ",
    ";": "     |  ## |  ## |     |  ## |  #  | #   ",
    "<": "   # |  #  | #   |#    | #   |  #  |   # ",
    "=": "     |     |#####|     |#####|     |     ",
    ">": " #   |  #  |   # |    #|   # |  #  | #   ",
    "?": " ### |#   #|    #|   # |  #  |     |  #  ",
    "@": " ### |#   #|    #| ## #|# # #|# # #| ### ",
    "A": " ### |#   #|#   #|#####|#   #|#   #|#   #",
    "B": "#### |#   #|#   #|#### |#   #|#   #|#### ",
    "C": " ### |#   #|#    |#    |#    |#   #| ### ",
    "D": "###  |#  # |#   #|#   #|#   #|#  # |###  ",
    "E": "#####|#    |#    |#### |#    |#    |#####",
    "F": "#####|#    |#    |#### |#    |#    |#    ",
    "G": " ### |#   #|#    |# ###|#   #|#   #| ####",
    "H": "#   #|#   #|#   #|#####|#   #|#   #|#   #",
    "I": " ### |  #  |  #  |  #  |  #  |  #  | ### ",
    "J": "  ###|   # |   # |   # |   # |#  # | ##  ",
    "K": "#   #|#  # |# #  |##   |# #  |#  # |#   #",
    "L": "#    |#    |#    |#    |#    |#    |#####",
    "M": "#   #|## ##|# # #|# # #|#   #|#   #|#   #",
    "N": "#   #|#   #|##  #|# # #|#  ##|#   #|#   #",
    "O": " ### |#   #|#   #|#   #|#   #|#   #| ### ",
    "P": "#### |#   #|#   #|#### |#    |#    |#    ",
    "Q": " ### |#   #|#   #|#   #|# # #|#  # | ## #",
    "R": "#### |#   #|#   #|#### |# #  |#  # |#   #",
    "S": " ####|#    |#    | ### |    #|    #|#### ",
    "T": "#####|  #  |  #  |  #  |  #  |  #  |  #  ",
    "U": "#   #|#   #|#   #|#   #|#   #|#   #| ### ",
    "V": "#   #|#   #|#   #|#   #|#   #| # # |  #  ",
    "W": "#   #|#   #|#   #|# # #|# # #|# # #| # # ",
    "X": "#   #|#   #| # # |  #  | # # |#   #|#   #",
    "Y": "#   #|#   #| # # |  #  |  #  |  #  |  #  ",
    "Z": "#####|    #|   # |  #  | #   |#    |#####",
    "[": " ### | #   | #   | #   | #   | #   | ### ",
    "\\": "     |#    | #   |  #  |   # |    #|     ",
    "]": " ### |   # |   # |   # |   # |   # | ### ",
    "^": "  #  | # # |#   #|     |     |     |     ",
    "_": "     |     |     |     |     |     |#####",
    "`": " #   |  #  |   # |     |     |     |     ",
    "a": "     |     | ### |    #| ####|#   #| ####",
    "b": "#    |#    |#### |#   #|#   #|#   #|#### ",
    "c": "     |     | ####|#    |#    |#    | ####",
    "d": "    #|    #| ####|#   #|#   #|#   #| ####",
    "e": "     |     | ### |#   #|#####|#    | ### ",
    "f": "  ## | #  #| #   |###  | #   | #   | #   ",
    "g": "     | ####|#   #|#   #| ####|    #| ### ",
    "h": "#    |#    |#### |#   #|#   #|#   #|#   #",
    "i": "  #  |     | ##  |  #  |  #  |  #  | ### ",
    "j": "   # |     |  ## |   # |   # |#  # | ##  ",
    "k": "#    |#    |#  # |# #  |##   |# #  |#  # ",
    "l": " ##  |  #  |  #  |  #  |  #  |  #  | ### ",
    "m": "     |     |## # |# # #|# # #|# # #|# # #",
    "n": "     |     |#### |#   #|#   #|#   #|#   #",
    "o": "     |     | ### |#   #|#   #|#   #| ### ",
    "p": "     |     |#### |#   #|#### |#    |#    ",
    "q": "     |     | ####|#   #| ####|    #|    #",
    "r": "     |     |# ## |##   |#    |#    |#    ",
    "s": "     |     | ####|#    | ### |    #|#### ",
    "t": " #   | #   |###  | #   | #   | #  #|  ## ",
    "u": "     |     |#   #|#   #|#   #|#  ##| ## #",
    "v": "     |     |#   #|#   #|#   #| # # |  #  ",
    "w": "     |     |#   #|#   #|# # #|# # #| # # ",
    "x": "     |     |#   #| # # |  #  | # # |#   #",
    "y": "     |     |#   #|#   #| ####|    #| ### ",
    "z": "     |     |#####|   # |  #  | #   |#####",
    "{": "   ##|  #  |  #  | ##  |  #  |  #  |   ##",
    "|": "  #  |  #  |  #  |  #  |  #  |  #  |  #  ",
    "}": "##   |  #  |  #  |  ## |  #  |  #  |##   ",
    "~": "     |     | #   |# # #|   # |     |     ",
}

_FALLBACK = "#####|#   #|#   #|#   #|#   #|#   #|#####"


def _to_mask(raw: str) -> np.ndarray:
    rows = raw.split("|")
    mask = np.zeros((GLYPH_HEIGHT, GLYPH_WIDTH), dtype=np.uint8)
    for r, row in enumerate(rows):
        for c, ch in enumerate(row):
            if ch == "#":
                mask[r, c] = 1
    return mask


_MASKS: dict[str, np.ndarray] = {}


def glyph_mask(ch: str) -> np.ndarray:
    """7x5 uint8 {0,1} bitmap for one character."""
    cached = _MASKS.get(ch)
    if cached is None:
        cached = _to_mask(_RAW.get(ch, _FALLBACK))
        cached.setflags(write=False)
        _MASKS[ch] = cached
    return cached
