"""Binary format round trips and reader validation."""

import io

import numpy as np
import pytest

from ctcrelax import (
    EvalManifest,
    FormatError,
    LayerStack,
    ManifestEntry,
    ParseError,
    ProjectionHead,
    TruncationError,
    VersionError,
    Vocabulary,
    read_layer_stack,
    read_manifest,
    read_projection_head,
    read_vocabulary,
    write_layer_stack,
    write_manifest,
    write_projection_head,
    write_vocabulary,
)


def make_stack(rng, n, t, d) -> LayerStack:
    return LayerStack(rng.normal(size=(n, t, d)).astype(np.float32))


class TestLayerStackFormat:
    def test_byte_count_is_header_plus_payload(self):
        rng = np.random.default_rng(0)
        sink = io.BytesIO()
        written = write_layer_stack(make_stack(rng, 2, 3, 4), sink)
        assert written == 20 + 4 * 2 * 3 * 4 == 116
        assert len(sink.getvalue()) == written

    def test_exact_bytes_of_minimal_stack(self):
        stack = LayerStack(np.zeros((1, 1, 1), dtype=np.float32))
        sink = io.BytesIO()
        write_layer_stack(stack, sink)
        expected = (
            b"SSLA"
            + (1).to_bytes(4, "little") * 4  # version, N, T, D
            + b"\x00\x00\x00\x00"
        )
        assert sink.getvalue() == expected

    @pytest.mark.parametrize("shape", [(1, 1, 1), (2, 3, 4), (5, 7, 3), (12, 20, 8)])
    def test_round_trip_bit_exact(self, shape):
        rng = np.random.default_rng(hash(shape) % 2**32)
        stack = make_stack(rng, *shape)
        sink = io.BytesIO()
        write_layer_stack(stack, sink)
        back = read_layer_stack(io.BytesIO(sink.getvalue()))
        assert back.data.dtype == np.float32
        assert np.array_equal(back.data, stack.data)

    def test_bad_magic(self):
        with pytest.raises(FormatError):
            read_layer_stack(io.BytesIO(b"XXXX" + b"\x00" * 32))

    def test_bad_version(self):
        payload = b"SSLA" + (2).to_bytes(4, "little") + (1).to_bytes(4, "little") * 3
        with pytest.raises(VersionError):
            read_layer_stack(io.BytesIO(payload + b"\x00" * 4))

    def test_truncated_payload(self):
        header = b"SSLA" + (1).to_bytes(4, "little") + b"".join(
            n.to_bytes(4, "little") for n in (2, 2, 2)
        )
        with pytest.raises(TruncationError):
            read_layer_stack(io.BytesIO(header + b"\x00" * (4 * 7)))  # 7 of 8 floats

    def test_trailing_data_rejected(self):
        rng = np.random.default_rng(1)
        sink = io.BytesIO()
        write_layer_stack(make_stack(rng, 1, 2, 2), sink)
        with pytest.raises(FormatError):
            read_layer_stack(io.BytesIO(sink.getvalue() + b"\x00"))

    def test_nan_payload_rejected(self):
        header = b"SSLA" + (1).to_bytes(4, "little") * 4
        nan = np.array([np.nan], dtype="<f4").tobytes()
        with pytest.raises(ValueError):
            read_layer_stack(io.BytesIO(header + nan))

    def test_constructor_rejects_nonfinite(self):
        bad = np.zeros((1, 1, 2), dtype=np.float32)
        bad[0, 0, 0] = np.inf
        with pytest.raises(ValueError):
            LayerStack(bad)


class TestProjectionHeadFormat:
    def test_round_trip(self):
        rng = np.random.default_rng(2)
        head = ProjectionHead(
            weights=rng.normal(size=(3, 2)).astype(np.float32),
            bias=rng.normal(size=3).astype(np.float32),
        )
        sink = io.BytesIO()
        write_projection_head(head, sink)
        back = read_projection_head(io.BytesIO(sink.getvalue()))
        assert back.vocab_size == 3 and back.hidden_dim == 2
        assert back.weights.size == 6 and back.bias.size == 3
        assert np.array_equal(back.weights, head.weights)
        assert np.array_equal(back.bias, head.bias)

    def test_stack_magic_in_head_slot(self):
        with pytest.raises(FormatError):
            read_projection_head(io.BytesIO(b"SSLA" + b"\x00" * 24))

    def test_truncated_bias(self):
        header = b"SSLP" + (1).to_bytes(4, "little") + b"".join(
            n.to_bytes(4, "little") for n in (3, 2)
        )
        with pytest.raises(TruncationError):
            read_projection_head(io.BytesIO(header + b"\x00" * (4 * 7)))  # 7 of 9


class TestVocabulary:
    def test_basic_parse(self):
        vocab = read_vocabulary(io.StringIO("<blank>\n<sep>\na\nb\n"))
        assert vocab.size == 4
        assert vocab.blank_index == 0
        assert vocab.separator_index == 1

    def test_duplicate_token(self):
        with pytest.raises(ParseError, match="duplicate"):
            read_vocabulary(io.StringIO("<blank>\n<sep>\na\na\n"))

    def test_missing_blank(self):
        with pytest.raises(ParseError, match="<blank>"):
            read_vocabulary(io.StringIO("a\nb\n<sep>\n"))

    def test_missing_separator(self):
        with pytest.raises(ParseError, match="<sep>"):
            read_vocabulary(io.StringIO("<blank>\na\nb\n"))

    def test_round_trip(self):
        vocab = Vocabulary(("x", "<sep>", "<blank>", "y"), blank_index=2, separator_index=1)
        sink = io.StringIO()
        write_vocabulary(vocab, sink)
        assert read_vocabulary(io.StringIO(sink.getvalue())) == vocab

    def test_render_and_encode(self):
        vocab = Vocabulary(("<blank>", "<sep>", "a", "b"), 0, 1)
        assert vocab.render((2, 1, 3)) == "a b"
        assert vocab.encode("a b") == (2, 1, 3)

    def test_encode_case_fallback(self):
        # uppercase character vocab (the wav2vec2 convention) must accept
        # the lowercase references manifests carry
        vocab = Vocabulary(("<blank>", "<sep>", "A", "B"), 0, 1)
        assert vocab.encode("ab a") == (2, 3, 1, 2)
        with pytest.raises(ValueError):
            vocab.encode("a0")


class TestManifest:
    def test_round_trip(self, tmp_path):
        stack_file = tmp_path / "u.ssla"
        stack_file.write_bytes(b"")
        manifest = EvalManifest(
            entries=(ManifestEntry("u1", stack_file, "hello world"),)
        )
        sink = io.StringIO()
        write_manifest(manifest, sink)
        back = read_manifest(io.StringIO(sink.getvalue()), base_dir=tmp_path)
        assert back.entries[0].utterance_id == "u1"
        assert back.entries[0].reference == "hello world"

    def test_missing_path_rejected(self, tmp_path):
        text = "u1\tnot-there.ssla\thello\n"
        with pytest.raises(ParseError, match="does not exist"):
            read_manifest(io.StringIO(text), base_dir=tmp_path)

    def test_duplicate_id_rejected(self, tmp_path):
        f = tmp_path / "u.ssla"
        f.write_bytes(b"")
        text = f"u1\t{f}\ta\nu1\t{f}\tb\n"
        with pytest.raises(ParseError, match="duplicate"):
            read_manifest(io.StringIO(text), base_dir=tmp_path)
