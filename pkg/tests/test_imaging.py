import io
import json

import numpy as np
import pytest

from rgvss.analytic import SchemeParams, StackOp
from rgvss.codec import EncodingPolicy
from rgvss.imaging import (
    Bitmap,
    PBMError,
    ShareSet,
    encode_image,
    make_test_card,
    measure_transmission,
    read_pbm,
    reconstruct,
    write_pbm,
)
from rgvss.numeric import ratio


@pytest.fixture
def rng():
    return np.random.default_rng(2013)


def random_bitmap(rng, width, height):
    return Bitmap(rng.integers(0, 2, (height, width)))


class TestBitmap:
    def test_immutable(self):
        bm = Bitmap.filled(3, 2)
        with pytest.raises(ValueError):
            bm.pixels[0, 0] = 1

    def test_copy_on_construct(self):
        arr = np.zeros((2, 2), dtype=np.uint8)
        bm = Bitmap(arr)
        arr[0, 0] = 1
        assert bm.pixels[0, 0] == 0

    def test_dimensions(self):
        bm = Bitmap.filled(5, 3)
        assert (bm.width, bm.height) == (5, 3)
        with pytest.raises(ValueError):
            Bitmap(np.zeros((0, 4)))
        with pytest.raises(ValueError):
            Bitmap(np.zeros(4))
        with pytest.raises(ValueError):
            Bitmap(np.full((2, 2), 2))

    def test_test_card(self):
        card = make_test_card(4, 4)
        assert card.pixels.tolist() == [[0] * 4, [0] * 4, [1] * 4, [1] * 4]


class TestPBM:
    def test_p1_checkerboard(self):
        bm = read_pbm(b"P1\n2 2\n1 0\n0 1\n")
        assert bm.pixels.tolist() == [[1, 0], [0, 1]]

    def test_p1_comments_and_packed_digits(self):
        bm = read_pbm(b"P1 # comment\n# another\n3 1\n101")
        assert bm.pixels.tolist() == [[1, 0, 1]]

    def test_p4_padding(self):
        bm = Bitmap.from_rows([[1, 0, 1, 1, 1], [0, 0, 0, 0, 1]])
        data = write_pbm(bm)
        assert data == b"P4\n5 2\n" + bytes([0b10111000, 0b00001000])
        # junk in the padding bits is ignored
        assert read_pbm(b"P4\n5 2\n" + bytes([0b10111111, 0b00001101])) == bm

    @pytest.mark.parametrize("binary", [True, False])
    def test_round_trip_random(self, rng, binary):
        for _ in range(100):
            w, h = rng.integers(1, 40, 2)
            bm = random_bitmap(rng, int(w), int(h))
            assert read_pbm(write_pbm(bm, binary=binary)) == bm

    def test_round_trip_13x7_file(self, rng, tmp_path):
        bm = random_bitmap(rng, 13, 7)
        path = tmp_path / "x.pbm"
        write_pbm(bm, path)
        assert read_pbm(path) == bm
        assert read_pbm(io.BytesIO(path.read_bytes())) == bm

    def test_p1_long_rows_wrap(self, rng):
        bm = random_bitmap(rng, 100, 2)
        data = write_pbm(bm, binary=False)
        assert max(len(line) for line in data.splitlines()) <= 70
        assert read_pbm(data) == bm

    @pytest.mark.parametrize(
        "data,offset",
        [
            (b"P5\n1 1\n\x00", 0),
            (b"P", 1),
            (b"P1\n0 2\n", 3),
            (b"P1\n2\n", 5),
            (b"P1\n2 2\n1 0 1", 12),
            (b"P1\n1 1\n2", 7),
            (b"P4\n9 2\n\x00\x00\x00", 10),
            (b"P4\n8 1", 6),
        ],
    )
    def test_malformed(self, data, offset):
        with pytest.raises(PBMError) as info:
            read_pbm(data)
        assert info.value.offset == offset
        assert f"byte {offset}" in str(info.value)


class TestEncodeReconstruct:
    def test_single_pixel(self):
        secret = Bitmap.filled(1, 1, 0)
        shares = encode_image(secret, EncodingPolicy.averaged(SchemeParams(2, 3)), 99)
        assert len(shares) == 3
        assert all(s.shape == (1, 1) for s in shares.shares)

    def test_deterministic(self, rng):
        secret = random_bitmap(rng, 17, 9)
        policy = EncodingPolicy.averaged(SchemeParams(2, 3))
        assert encode_image(secret, policy, 5) == encode_image(secret, policy, 5)
        assert encode_image(secret, policy, 5) != encode_image(secret, policy, 6)

    def test_single_share_black_fraction(self):
        shares = encode_image(make_test_card(64, 64), EncodingPolicy.averaged(SchemeParams(2, 3)), 1)
        for share in shares.shares:
            assert abs(share.pixels.mean() - 0.5) < 0.05

    def test_reconstruct_identity(self, rng):
        r = random_bitmap(rng, 6, 4)
        assert reconstruct([r], StackOp.OR) == r
        assert reconstruct([r], "xor") == r

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_xor_full_stack_is_exact(self, rng, n):
        secret = random_bitmap(rng, 31, 11)
        shares = encode_image(secret, EncodingPolicy.fixed(SchemeParams(2, n), n), 3)
        assert reconstruct(shares.shares, "xor") == secret

    def test_or_full_stack_black_region_is_black(self):
        card = make_test_card(32, 32)
        shares = encode_image(card, EncodingPolicy.averaged(SchemeParams(2, 3)), 8)
        recon = reconstruct(shares.shares, "or")
        assert measure_transmission(recon, card, 1) == 0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            reconstruct([Bitmap.filled(2, 2), Bitmap.filled(3, 2)], "or")
        with pytest.raises(ValueError):
            reconstruct([], "or")

    def test_shareset_validation(self):
        scheme = SchemeParams(2, 3)
        with pytest.raises(ValueError):
            ShareSet(scheme, (Bitmap.filled(1, 1),) * 2, 0, EncodingPolicy.averaged(scheme))

    def test_save_writes_shares_and_manifest(self, tmp_path):
        card = make_test_card(8, 8)
        policy = EncodingPolicy.fixed(SchemeParams(2, 3), 3)
        shares = encode_image(card, policy, 42)
        manifest_path = shares.save(tmp_path, "card")
        manifest = json.loads(manifest_path.read_text())
        assert manifest == {
            "scheme": {"k": 2, "n": 3},
            "policy": "fixed:3",
            "seed": 42,
            "width": 8,
            "height": 8,
            "shares": ["card.share1.pbm", "card.share2.pbm", "card.share3.pbm"],
        }
        for i, name in enumerate(manifest["shares"]):
            assert read_pbm(tmp_path / name) == shares[i]


class TestMeasure:
    def test_examples(self):
        card = make_test_card(4, 4)
        assert measure_transmission(card, card, 0) == 1
        assert measure_transmission(card, card, 1) == 0
        assert measure_transmission(Bitmap.filled(4, 4, 1), card, 0) == 0

    def test_fraction(self):
        secret = Bitmap.filled(4, 1, 0)
        recon = Bitmap.from_rows([[0, 1, 1, 1]])
        assert measure_transmission(recon, secret, 0) == ratio(1, 4)

    def test_regions_partition(self, rng):
        secret = random_bitmap(rng, 20, 20)
        recon = random_bitmap(rng, 20, 20)
        t0 = measure_transmission(recon, secret, 0)
        t1 = measure_transmission(recon, secret, 1)
        n0 = int((secret.pixels == 0).sum())
        n1 = int((secret.pixels == 1).sum())
        assert 0 <= t0 <= 1 and 0 <= t1 <= 1
        assert t0 * n0 + t1 * n1 == int((recon.pixels == 0).sum())

    def test_errors(self):
        with pytest.raises(ValueError):
            measure_transmission(Bitmap.filled(2, 2), Bitmap.filled(2, 2, 0), 1)
        with pytest.raises(ValueError):
            measure_transmission(Bitmap.filled(2, 2), Bitmap.filled(3, 2), 0)

    def test_t2_or_close_to_closed_form(self):
        card = make_test_card(256, 256)
        shares = encode_image(card, EncodingPolicy.averaged(SchemeParams(2, 3)), 4)
        t0 = measure_transmission(reconstruct(shares.shares[:2], "or"), card, 0)
        # 3 sigma of 32768 Bernoulli(7/24) draws is about 0.0075
        assert abs(float(t0) - 7 / 24) < 0.0075
