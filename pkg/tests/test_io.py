import numpy as np
import pytest

from tenslab import (
    CPDecomposition,
    DenseTensor,
    MonomialPoly,
    hosvd,
    tt_reconstruct,
    tt_svd,
    tucker_reconstruct,
)
from tenslab.io import (
    FormatError,
    read_cp,
    read_decomposition,
    read_dense,
    read_meshes,
    read_poly,
    read_tt,
    read_tucker,
    write_cp,
    write_dense,
    write_meshes,
    write_poly,
    write_tt,
    write_tucker,
)
from tenslab.funcgrid import Mesh


class TestDenseFormats:
    def test_binary_round_trip(self, rng, tmp_path):
        A = DenseTensor(rng.standard_normal((3, 4, 2)))
        p = tmp_path / "a.dten"
        write_dense(A, p)
        assert read_dense(p) == A

    def test_text_round_trip(self, rng, tmp_path):
        A = DenseTensor(rng.standard_normal((2, 5)))
        p = tmp_path / "a.dtent"
        write_dense(A, p)
        assert read_dense(p) == A

    def test_layout_is_documented_binary(self, tmp_path):
        A = DenseTensor.from_flat((2, 2), [1.0, 2.0, 3.0, 4.0])
        p = tmp_path / "a.dten"
        write_dense(A, p)
        blob = p.read_bytes()
        assert blob[:6] == b"DTEN1\n"
        assert int.from_bytes(blob[6:10], "little") == 2
        assert int.from_bytes(blob[10:18], "little") == 2
        assert np.frombuffer(blob[26:], dtype="<f8").tolist() == [1.0, 2.0, 3.0, 4.0]

    def test_bad_magic_names_offset(self, fixtures_dir):
        with pytest.raises(FormatError, match="byte offset 2"):
            read_dense(fixtures_dir / "bad_magic.dten")

    def test_truncated_file(self, tmp_path):
        p = tmp_path / "a.dten"
        p.write_bytes(b"DTEN1\n" + (3).to_bytes(4, "little"))
        with pytest.raises(FormatError, match="truncated"):
            read_dense(p)

    def test_trailing_bytes_rejected(self, tmp_path, rng):
        A = DenseTensor(rng.standard_normal((2, 2)))
        p = tmp_path / "a.dten"
        write_dense(A, p)
        p.write_bytes(p.read_bytes() + b"\x00")
        with pytest.raises(FormatError, match="trailing"):
            read_dense(p)

    def test_malformed_text(self, tmp_path):
        p = tmp_path / "a.dtent"
        p.write_text("2\n2 2\n1 2 3 oops\n")
        with pytest.raises(FormatError):
            read_dense(p)

    def test_fixture_values(self, fixtures_dir):
        A = read_dense(fixtures_dir / "ones222.dtent")
        assert A.dims == (2, 2, 2)
        np.testing.assert_array_equal(A.data, np.ones((2, 2, 2)))


class TestDecompositionFormats:
    def test_cp_round_trip(self, rng, tmp_path):
        cp = CPDecomposition.from_factors([rng.standard_normal((4, 3))
                                           for _ in range(3)],
                                          rng.uniform(1, 2, 3))
        p = tmp_path / "m.cpd"
        write_cp(cp, p)
        back = read_cp(p)
        np.testing.assert_array_equal(back.weights, cp.weights)
        for X, Y in zip(back.factors, cp.factors):
            np.testing.assert_array_equal(X, Y)

    def test_tucker_round_trip(self, rng, tmp_path):
        A = DenseTensor(rng.standard_normal((4, 3, 5)))
        tuck, _ = hosvd(A, (2, 2, 3))
        p = tmp_path / "m.tuck"
        write_tucker(tuck, p)
        back = read_tucker(p)
        np.testing.assert_array_equal(back.core.data, tuck.core.data)
        np.testing.assert_allclose(tucker_reconstruct(back).data,
                                   tucker_reconstruct(tuck).data, atol=1e-14)

    def test_tt_round_trip(self, rng, tmp_path):
        A = DenseTensor(rng.standard_normal((3, 4, 3)))
        T, _ = tt_svd(A, ranks=(2, 2))
        p = tmp_path / "m.tten"
        write_tt(T, p)
        back = read_tt(p)
        assert back.ranks == T.ranks
        np.testing.assert_array_equal(tt_reconstruct(back).data,
                                      tt_reconstruct(T).data)

    def test_dispatch_on_magic(self, rng, tmp_path):
        A = DenseTensor(rng.standard_normal((2, 3, 2)))
        cp = CPDecomposition.from_factors([rng.standard_normal((2, 2)),
                                           rng.standard_normal((3, 2)),
                                           rng.standard_normal((2, 2))])
        T, _ = tt_svd(A, ranks=(2, 2))
        tuck, _ = hosvd(A, (2, 2, 2))
        files = {
            "dense": (tmp_path / "x.dten", lambda p: write_dense(A, p), DenseTensor),
            "cp": (tmp_path / "x.cpd", lambda p: write_cp(cp, p), CPDecomposition),
        }
        write_tt(T, tmp_path / "x.tten")
        write_tucker(tuck, tmp_path / "x.tuck")
        for p, writer, cls in files.values():
            writer(p)
            assert isinstance(read_decomposition(p), cls)
        from tenslab.tt import TTTensor
        from tenslab.tucker import TuckerDecomposition
        assert isinstance(read_decomposition(tmp_path / "x.tten"), TTTensor)
        assert isinstance(read_decomposition(tmp_path / "x.tuck"), TuckerDecomposition)

    def test_unknown_magic(self, tmp_path):
        p = tmp_path / "weird.bin"
        p.write_bytes(b"NOPE!\n123456")
        with pytest.raises(FormatError, match="unrecognized magic"):
            read_decomposition(p)


class TestTextFormats:
    def test_mesh_round_trip(self, tmp_path):
        meshes = [Mesh([0.0, 0.5, 1.0]), Mesh([-2.0, 3.0])]
        p = tmp_path / "m.txt"
        write_meshes(meshes, p)
        back = read_meshes(p)
        assert [m.points for m in back] == [m.points for m in meshes]

    def test_mesh_rejects_nonincreasing(self, tmp_path):
        p = tmp_path / "m.txt"
        p.write_text("1.0 0.5\n")
        with pytest.raises(FormatError, match=":1:"):
            read_meshes(p)

    def test_poly_round_trip(self, tmp_path):
        P = MonomialPoly([(1.0, (2, 0)), (2.0, (1, 1)), (1.0, (0, 2))])
        p = tmp_path / "p.txt"
        write_poly(P, p)
        back = read_poly(p)
        assert back.terms == P.terms

    def test_poly_fixture_with_comment(self, fixtures_dir):
        P = read_poly(fixtures_dir / "poly_sumsquare.txt")
        assert P.n_terms == 3
        assert P(1.0, 2.0) == pytest.approx(9.0)

    def test_poly_rejects_garbage(self, tmp_path):
        p = tmp_path / "p.txt"
        p.write_text("1.0 a b\n")
        with pytest.raises(FormatError, match=":1:"):
            read_poly(p)
