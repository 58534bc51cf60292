"""Binary tensor formats: round-tripping stacks, heads, and vocabularies.

A layer stack is everything one utterance produced on its way up the
transformer: one [T, D] hidden-state matrix per layer.  The projection
head is the affine map that turns any of those hidden states into
vocabulary logits.  Both serialize to tiny little-endian binary files so
a decoding run never needs the original checkpoint.
"""

import io

import numpy as np

from ctcrelax import (
    LayerStack,
    ProjectionHead,
    Vocabulary,
    read_layer_stack,
    read_projection_head,
    read_vocabulary,
    write_layer_stack,
    write_projection_head,
    write_vocabulary,
)

rng = np.random.default_rng(0)

# A 4-layer stack of 6 frames with 8 hidden dims, as float32.
stack = LayerStack(rng.normal(size=(4, 6, 8)).astype(np.float32))
buf = io.BytesIO()
written = write_layer_stack(stack, buf)
print(f"stack ({stack.num_layers} layers, {stack.num_frames} frames, "
      f"{stack.hidden_dim} dims) -> {written} bytes")
print("header bytes:", buf.getvalue()[:20].hex(" "))

# Reading back is bit-exact: the payload is the same float32 data.
back = read_layer_stack(io.BytesIO(buf.getvalue()))
print("round trip exact:", np.array_equal(back.data, stack.data))

# The projection head: 10 vocabulary entries from 8 hidden dims.
head = ProjectionHead(
    weights=rng.normal(size=(10, 8)).astype(np.float32),
    bias=rng.normal(size=10).astype(np.float32),
)
buf = io.BytesIO()
print("head ->", write_projection_head(head, buf), "bytes")
print("head round trip exact:",
      np.array_equal(read_projection_head(io.BytesIO(buf.getvalue())).weights, head.weights))

# The vocabulary is a sidecar text file; <blank> and <sep> mark the two
# special CTC tokens.
vocab = Vocabulary(
    tokens=("<blank>", "<sep>", "a", "b", "c", "d", "e", "f", "g", "h"),
    blank_index=0,
    separator_index=1,
)
text = io.StringIO()
write_vocabulary(vocab, text)
print("vocab file:")
print(text.getvalue().rstrip())
parsed = read_vocabulary(io.StringIO(text.getvalue()))
print("blank:", parsed.blank_index, "separator:", parsed.separator_index)
print("render of (2, 1, 3):", repr(parsed.render((2, 1, 3))))
