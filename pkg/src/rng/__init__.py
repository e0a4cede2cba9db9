from .streams import (
    RngStream,
    StreamKey,
    StreamRole,
    derive,
    geometric_level,
    normal,
    stream,
    uniform,
)
