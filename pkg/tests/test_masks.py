"""Modifiability masks and adversarial post-processing."""

import numpy as np
import pytest

from evadegan import masks, nslkdd
from evadegan.masks import (
    FUNCTIONAL_ONLY,
    CategoryMismatch,
    NoAblationDefined,
    NoMaskForNormal,
    ablation_mask,
    apply_mask,
    apply_mask_batch,
    functional_mask,
    postprocess,
)
from evadegan.nslkdd import AttackCategory, EncodedVector, FeatureSchema


class TestFunctionalMask:
    def test_dos_frees_content_and_host(self):
        m = functional_mask(AttackCategory.DOS)
        assert m.n_modifiable() == 23
        for i in FeatureSchema.indices_of_set(nslkdd.CONTENT):
            assert m.modifiable[i]
        for i in FeatureSchema.indices_of_set(nslkdd.HOST_BASED):
            assert m.modifiable[i]

    def test_u2r_and_r2l_free_time_and_host(self):
        for cat in (AttackCategory.U2R, AttackCategory.R2L):
            m = functional_mask(cat)
            assert m.n_modifiable() == 19
            for i in FeatureSchema.indices_of_set(nslkdd.TIME_BASED):
                assert m.modifiable[i]
            for i in FeatureSchema.indices_of_set(nslkdd.HOST_BASED):
                assert m.modifiable[i]

    def test_u2r_r2l_masks_identical(self):
        assert np.array_equal(
            functional_mask(AttackCategory.U2R).modifiable,
            functional_mask(AttackCategory.R2L).modifiable,
        )

    def test_probe_frees_content_only(self):
        m = functional_mask(AttackCategory.PROBE)
        assert m.n_modifiable() == 13
        free = {i for i in range(41) if m.modifiable[i]}
        assert free == set(FeatureSchema.indices_of_set(nslkdd.CONTENT))

    @pytest.mark.parametrize(
        "cat", [AttackCategory.DOS, AttackCategory.PROBE, AttackCategory.U2R, AttackCategory.R2L]
    )
    def test_intrinsic_never_modifiable(self, cat):
        m = functional_mask(cat)
        for i in FeatureSchema.indices_of_set(nslkdd.INTRINSIC):
            assert not m.modifiable[i]

    @pytest.mark.parametrize(
        "cat", [AttackCategory.DOS, AttackCategory.PROBE, AttackCategory.U2R, AttackCategory.R2L]
    )
    def test_multi_valued_features_never_modifiable(self, cat):
        m = functional_mask(cat)
        for i in FeatureSchema.indices_of_kind(nslkdd.DISCRETE_MULTI):
            assert not m.modifiable[i]

    def test_normal_has_no_mask(self):
        with pytest.raises(NoMaskForNormal):
            functional_mask(AttackCategory.NORMAL)


class TestAblationMask:
    def test_dos_count(self):
        assert ablation_mask(AttackCategory.DOS).n_modifiable() == 23 - 12

    def test_u2r_count(self):
        assert ablation_mask(AttackCategory.U2R).n_modifiable() == 19 - 9

    def test_probe_has_no_ablation(self):
        with pytest.raises(NoAblationDefined):
            ablation_mask(AttackCategory.PROBE)

    @pytest.mark.parametrize("cat", [AttackCategory.DOS, AttackCategory.U2R, AttackCategory.R2L])
    def test_proper_subset_of_functional(self, cat):
        fun = functional_mask(cat).modifiable
        abl = ablation_mask(cat).modifiable
        assert (abl & ~fun).sum() == 0  # nothing newly freed
        assert abl.sum() < fun.sum()  # strictly fewer features free

    def test_dos_frozen_names(self):
        m = ablation_mask(AttackCategory.DOS)
        for name in ("hot", "logged_in", "dst_host_count", "dst_host_serror_rate"):
            assert not m.modifiable[nslkdd.FEATURE_INDEX[name]]
        # a content feature not on the extra list stays modifiable
        assert m.modifiable[nslkdd.FEATURE_INDEX["num_shells"]]


class TestApplyMask:
    def _vec(self, cat=AttackCategory.DOS):
        rng = np.random.default_rng(0)
        return EncodedVector(values=rng.random(41), category=cat)

    def test_all_frozen_is_identity(self):
        original = self._vec()
        mask = masks.FeatureMask(
            modifiable=np.zeros(41, dtype=bool),
            category=AttackCategory.DOS,
            setting=FUNCTIONAL_ONLY,
        )
        out = apply_mask(original, np.ones(41), mask)
        assert np.array_equal(out.values, original.values)

    def test_generated_equals_original_is_identity(self):
        original = self._vec()
        mask = functional_mask(AttackCategory.DOS)
        out = apply_mask(original, original.values.copy(), mask)
        assert np.array_equal(out.values, original.values)

    def test_elementwise_selection(self):
        original = self._vec()
        mask = functional_mask(AttackCategory.DOS)
        generated = np.random.default_rng(1).random(41)
        out = apply_mask(original, generated, mask)
        for i in range(41):
            expected = generated[i] if mask.modifiable[i] else original.values[i]
            assert out.values[i] == expected

    def test_category_mismatch(self):
        original = self._vec(AttackCategory.U2R)
        with pytest.raises(CategoryMismatch):
            apply_mask(original, np.ones(41), functional_mask(AttackCategory.DOS))

    def test_batch_matches_single(self):
        rng = np.random.default_rng(2)
        originals = rng.random((8, 41))
        generated = rng.random((8, 41))
        mask = functional_mask(AttackCategory.U2R)
        batch = apply_mask_batch(originals, generated, mask)
        for r in range(8):
            single = apply_mask(
                EncodedVector(originals[r], AttackCategory.U2R), generated[r], mask
            )
            assert np.array_equal(batch[r], single.values)


class TestPostprocess:
    def test_clamps_out_of_range(self, schema):
        i = nslkdd.FEATURE_INDEX["duration"]
        vec = np.full(41, 0.5)
        vec[i] = 1.3
        out = postprocess(vec, schema)
        assert out[i] == 1.0
        vec[i] = -0.2
        assert postprocess(vec, schema)[i] == 0.0

    def test_binary_threshold(self, schema):
        i = nslkdd.FEATURE_INDEX["logged_in"]
        vec = np.full(41, 0.5)
        vec[i] = 0.5
        assert postprocess(vec, schema)[i] == 1.0  # tie goes to 1
        vec[i] = 0.4999
        assert postprocess(vec, schema)[i] == 0.0

    def test_continuous_untouched(self, schema):
        i = nslkdd.FEATURE_INDEX["serror_rate"]
        vec = np.full(41, 0.0)
        vec[i] = 0.73
        assert postprocess(vec, schema)[i] == 0.73

    def test_all_binary_exactly_zero_or_one(self, schema):
        rng = np.random.default_rng(3)
        batch = rng.uniform(-0.5, 1.5, size=(64, 41))
        out = postprocess(batch, schema)
        assert out.min() >= 0.0 and out.max() <= 1.0
        for i in schema.binary_indices:
            assert np.isin(out[:, i], (0.0, 1.0)).all()


class TestAudit:
    def test_mask_export_lists_every_feature(self):
        text = functional_mask(AttackCategory.DOS).to_text()
        lines = text.strip().splitlines()
        assert len(lines) == 42  # header + 41 features
        assert "serror_rate\tfrozen" in text
        assert "dst_host_serror_rate\tmodifiable" in text
