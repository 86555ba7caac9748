from gradzip.coders import base  # noqa
from gradzip.coders import huffman  # noqa
from gradzip.coders import lz78  # noqa
