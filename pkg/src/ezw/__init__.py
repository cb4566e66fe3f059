"""Embedded zerotree wavelet image codec with scheduled dominant-pass skipping."""

from .errors import EzwError, FormatError, InputError
from .imageio import GrayImage, read_pgm, write_pgm
from .wavelet import BANKS, DAUB4, HAAR, CoeffPyramid, FilterBank, forward_dwt_2d, inverse_dwt_2d
from .codec import EncoderConfig, decode, encode
from .metrics import PassStats, compression_ratio, psnr

__all__ = [
    "BANKS",
    "DAUB4",
    "HAAR",
    "CoeffPyramid",
    "EncoderConfig",
    "EzwError",
    "FilterBank",
    "FormatError",
    "GrayImage",
    "InputError",
    "PassStats",
    "compression_ratio",
    "decode",
    "encode",
    "forward_dwt_2d",
    "inverse_dwt_2d",
    "psnr",
    "read_pgm",
    "write_pgm",
]
