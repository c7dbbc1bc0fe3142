import numpy as np
import pytest

from structrev.model import Face, FaceDistribution, ReflectingWalkModel
from structrev.presets import (ROUNDED_EXTRA, EXTRA_BASE, ExtraArrivalParameters,
                               extra_arrival_constants, jackson_extra_arrivals)
from structrev.reversibility import (AllZeroRow, NotIrreducible, RatioMismatch,
                                     ReversibilityConstants, Status, SupportMismatch,
                                     boundary_origin_constants, check_a3, check_conditions,
                                     check_flexible_boundary, face_interior_constants)


def _replace(model, face, changes):
    dist = model.face(face)
    arr = dist.probs.copy()
    for (i, j), v in changes.items():
        arr[i + 1, j + 1] = v
    faces = {f: model.face(f) for f in Face}
    faces[face] = FaceDistribution(face, arr)
    return ReflectingWalkModel(faces[Face.ORIGIN], faces[Face.HORIZONTAL], faces[Face.VERTICAL],
                               faces[Face.INTERIOR])


@pytest.fixture(scope="module")
def rounded():
    p = ROUNDED_EXTRA
    return extra_arrival_constants(p["lambda1"], p["lambda2"], p["lambda2_1"], p["lambda1_2"],
                                   p["lambda1_0"], p["lambda2_0"])


class TestFaceInterior:
    def test_jackson_is_one(self, jackson_model):
        assert face_interior_constants(jackson_model) == (1.0, 1.0)

    def test_extra_arrivals(self, extra_model):
        c1, c2 = face_interior_constants(extra_model)
        assert c1 == pytest.approx(2.0, rel=1e-12)
        assert c2 == pytest.approx(1.9160, rel=1e-3)

    def test_product_instance_ratios(self, product_model):
        with pytest.raises(RatioMismatch) as info:
            face_interior_constants(product_model, 1e-3)
        ratios = info.value.ratios
        assert ratios[-1] == pytest.approx(65.5165, rel=1e-3)
        assert ratios[0] == pytest.approx(43.4732, rel=1e-3)
        assert ratios[1] == pytest.approx(12.7203, rel=1e-3)

    def test_support_mismatch(self, jackson_model):
        bad = _replace(jackson_model, Face.HORIZONTAL, {(1, 1): 0.01, (0, 0): jackson_model.p1(0, 0) - 0.01})
        with pytest.raises(SupportMismatch) as info:
            face_interior_constants(bad)
        assert info.value.index == 1

    def test_all_zero_row(self, singular_model):
        with pytest.raises(AllZeroRow):
            face_interior_constants(singular_model)

    def test_scaling(self, jackson_model):
        kappa = 1.5
        p1 = jackson_model.p1
        changes = {(i, 1): kappa * p1(i, 1) for i in (-1, 0, 1)}
        extra = sum(changes.values()) - sum(p1(i, 1) for i in (-1, 0, 1))
        changes[(0, 0)] = p1(0, 0) - extra
        scaled = _replace(jackson_model, Face.HORIZONTAL, changes)
        c1, _ = face_interior_constants(scaled)
        assert c1 == pytest.approx(kappa, rel=1e-12)


class TestBoundaryOrigin:
    def test_extra_arrivals(self, extra_model):
        c10, c20 = boundary_origin_constants(extra_model)
        assert c10 == pytest.approx(4.1544, rel=1e-3)
        assert c20 == pytest.approx(4.3358, rel=1e-3)

    def test_jackson(self, jackson_model):
        assert boundary_origin_constants(jackson_model) == (1.0, 1.0)

    def test_zero_row(self, simple_walk):
        p0 = _replace(simple_walk, Face.ORIGIN, {(1, 0): 0.0, (0, 0): 0.75})
        model = _replace(p0, Face.HORIZONTAL, {(1, 0): 0.0, (0, 0): 0.5})
        assert boundary_origin_constants(model) == (0.0, 1.0)

    def test_both_zero(self, simple_walk):
        model = _replace(simple_walk, Face.ORIGIN, {(1, 0): 0.0, (0, 1): 0.0, (0, 0): 1.0})
        model = _replace(model, Face.HORIZONTAL, {(1, 0): 0.0, (0, 0): 0.5})
        model = _replace(model, Face.VERTICAL, {(0, 1): 0.0, (0, 0): 0.5})
        with pytest.raises(NotIrreducible):
            boundary_origin_constants(model)

    def test_origin_mass_without_axis_mass(self, simple_walk):
        model = _replace(simple_walk, Face.HORIZONTAL, {(1, 0): 0.0, (0, 0): 0.5})
        with pytest.raises(SupportMismatch):
            boundary_origin_constants(model)


class TestA3:
    def test_vacuous(self):
        assert check_a3(ReversibilityConstants(1.0, 7.0, 0.0, 3.0))

    def test_rounded_constants(self, rounded):
        assert rounded.c10 * rounded.c1plus == pytest.approx(8.3088, abs=1e-4)
        assert rounded.c20 * rounded.c2plus == pytest.approx(8.3076, abs=1e-4)
        assert check_a3(rounded, 1e-3)
        assert not check_a3(rounded, 1e-6)

    def test_fail(self):
        assert not check_a3(ReversibilityConstants(1.0, 2.0, 1.0, 1.0), 1e-6)

    def test_c0_is_max(self):
        c = ReversibilityConstants(2.0, 3.0, 1.0, 0.5)
        assert c.c0 == 2.0

    def test_invalid_constants(self):
        with pytest.raises(ValueError):
            ReversibilityConstants(0.0, 1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            ReversibilityConstants(1.0, 1.0, 0.0, 0.0)


class TestFlexibleBoundary:
    def test_instance_passes(self, extra_model):
        b1, b2 = check_flexible_boundary(extra_model)
        assert b1.status is Status.PASS and b2.status is Status.PASS

    def test_b1_fails_when_perturbed(self):
        params = ExtraArrivalParameters(EXTRA_BASE, lambda2_1=0.03, lambda1_2=11 / 180,
                                        lambda1_0=0.2104, lambda2_0=0.2)
        b1, _ = check_flexible_boundary(jackson_extra_arrivals(params))
        assert b1.status is Status.FAIL

    def test_b2_fails(self, extra_model):
        model = _replace(extra_model, Face.HORIZONTAL,
                         {(1, 0): 0.0, (0, 0): extra_model.p1(0, 0) + extra_model.p1(1, 0)})
        _, b2 = check_flexible_boundary(model)
        assert b2.status is Status.FAIL

    def test_not_applicable(self, product_model):
        b1, b2 = check_flexible_boundary(product_model)
        assert b1.status is b2.status is Status.NOT_APPLICABLE


class TestReport:
    def test_passing(self, extra_model):
        report = check_conditions(extra_model)
        assert all(getattr(report, n).passed for n in ("a1", "a2", "a3", "b1", "b2"))
        doc = report.to_dict()
        assert set(doc) >= {"a1", "a2", "a3", "b1", "b2"}
        assert doc["a1"]["status"] == "pass"

    def test_failure_carries_witness(self, product_model):
        doc = check_conditions(product_model, 1e-3).to_dict()
        assert doc["a1"]["status"] == "fail"
        assert set(doc["a1"]["details"]["ratios"]) == {"-1", "0", "1"}
        assert doc["a3"]["status"] == "not-applicable"

    def test_order_independent(self, extra_model):
        t = extra_model.transpose()
        c = check_conditions(extra_model).constants
        ct = check_conditions(t).constants
        assert (ct.c1plus, ct.c2plus, ct.c10, ct.c20) == pytest.approx((c.c2plus, c.c1plus, c.c20, c.c10))

    def test_both_products_equal_c0(self, extra_model):
        c = check_conditions(extra_model).constants
        assert c.c10 * c.c1plus == pytest.approx(c.c0, rel=1e-12)
        assert c.c20 * c.c2plus == pytest.approx(c.c0, rel=1e-12)
