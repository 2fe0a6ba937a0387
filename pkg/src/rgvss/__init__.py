"""Random-grid (k, n) visual secret sharing with OR and XOR decryption."""

from .analytic import (
    SchemeParams,
    StackOp,
    TransmissionSpec,
    avg_transmission,
    contrast,
    contrast_table,
    corrigendum_report,
    fixed_or_transmission,
    fixed_xor_transmission,
    scheme_contrast,
)
from .codec import EncodingPolicy, encode_pixel, stack
from .imaging import Bitmap, ShareSet, encode_image, measure_transmission, read_pbm, reconstruct, write_pbm
from .numeric import Ratio, binom, ratio

__version__ = "0.1.0"
