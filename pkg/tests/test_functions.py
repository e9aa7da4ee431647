import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridnas import CatalogConfig, Fn, TensorShape, arity, infer_shape, parameter_domain
from gridnas.errors import ConfigError, ShapeError
from gridnas.functions import ABLATION_PRESETS, FULL_SET


def test_full_set_is_the_seven_functions():
    assert {f.value for f in FULL_SET} == {"conv", "atte", "linear", "sum", "relu", "lnorm", "glu"}


def test_arity():
    assert arity(Fn.SUM) == 2
    assert arity(Fn.CONV) == 1
    assert arity(Fn.RELU) == 1
    assert all(arity(fn) == 1 for fn in FULL_SET if fn is not Fn.SUM)


def test_parameter_domains():
    assert list(parameter_domain(Fn.ATTE)) == [4, 8, 16]
    assert list(parameter_domain(Fn.LINEAR)) == [32, 128]
    # cross product of channels and kernels
    expected = {(c, k) for c in (16, 32) for k in (1, 3, 5)}
    assert set(parameter_domain(Fn.CONV)) == expected
    assert len(parameter_domain(Fn.CONV)) == 6
    for fn in (Fn.SUM, Fn.RELU, Fn.LNORM, Fn.GLU):
        assert list(parameter_domain(fn)) == [None]


def test_infer_shape_reference_rows():
    s = TensorShape(8, 400, 300)
    assert infer_shape(Fn.CONV, (32, 1), s) == TensorShape(8, 400, 32)
    assert infer_shape(Fn.LINEAR, 128, s) == TensorShape(8, 400, 128)
    assert infer_shape(Fn.SUM, None, TensorShape(8, 400, 32), TensorShape(8, 400, 128)) == TensorShape(8, 400, 128)
    assert infer_shape(Fn.ATTE, 16, TensorShape(8, 400, 128)) == TensorShape(8, 400, 128)


def test_glu_halves_features():
    assert infer_shape(Fn.GLU, None, TensorShape(1, 1, 2)) == TensorShape(1, 1, 1)
    assert infer_shape(Fn.GLU, None, TensorShape(2, 3, 5)) == TensorShape(2, 3, 3)
    with pytest.raises(ShapeError):
        infer_shape(Fn.GLU, None, TensorShape(2, 3, 1))


def test_sum_requires_matching_batch_and_length():
    with pytest.raises(ShapeError):
        infer_shape(Fn.SUM, None, TensorShape(2, 3, 4), TensorShape(2, 4, 4))
    with pytest.raises(ShapeError):
        infer_shape(Fn.SUM, None, TensorShape(2, 3, 4), TensorShape(3, 3, 4))


def test_arity_mismatch_rejected():
    with pytest.raises(ShapeError):
        infer_shape(Fn.RELU, None, TensorShape(1, 1, 1), TensorShape(1, 1, 1))
    with pytest.raises(ShapeError):
        infer_shape(Fn.SUM, None, TensorShape(1, 1, 1))


shapes = st.builds(
    TensorShape,
    st.integers(1, 8),
    st.integers(1, 16),
    st.integers(1, 512),
)


@settings(max_examples=120, deadline=None)
@given(shape=shapes, fn=st.sampled_from(FULL_SET), pick=st.integers(0, 5))
def test_batch_and_length_never_change(shape, fn, pick):
    domain = parameter_domain(fn)
    param = domain[pick % len(domain)]
    if fn is Fn.SUM:
        out = infer_shape(fn, param, shape, shape)
    elif fn is Fn.GLU and shape.dim < 2:
        return
    else:
        out = infer_shape(fn, param, shape)
    assert (out.batch, out.length) == (shape.batch, shape.length)
    assert out.dim >= 1


@settings(max_examples=60, deadline=None)
@given(
    batch=st.integers(1, 4), length=st.integers(1, 8),
    d1=st.integers(1, 300), d2=st.integers(1, 300),
)
def test_sum_shape_commutative(batch, length, d1, d2):
    a, b = TensorShape(batch, length, d1), TensorShape(batch, length, d2)
    assert infer_shape(Fn.SUM, None, a, b) == infer_shape(Fn.SUM, None, b, a)
    assert infer_shape(Fn.SUM, None, a, b).dim == max(d1, d2)


def test_catalog_presets():
    assert set(ABLATION_PRESETS) == {"full", "s_no_conv", "s_no_atte", "s_no_conv_atte"}
    no_conv = CatalogConfig.preset("s_no_conv")
    assert Fn.CONV not in no_conv and Fn.ATTE in no_conv
    no_both = CatalogConfig.preset("s_no_conv_atte")
    assert Fn.CONV not in no_both and Fn.ATTE not in no_both
    assert len(no_both.enabled) == 5
    with pytest.raises(ConfigError):
        CatalogConfig.preset("s_no_linear")


def test_catalog_from_names():
    cat = CatalogConfig.from_names(["relu", "conv"])
    assert cat.enabled == (Fn.CONV, Fn.RELU)  # canonical order
    with pytest.raises(ConfigError):
        CatalogConfig.from_names(["pooling"])
    with pytest.raises(ConfigError):
        CatalogConfig(())


def test_chain_only_without_sum(desk_grid_cfg):
    # removing sum leaves only one-input functions: every decoded graph is a chain
    import numpy as np
    from gridnas import decode, random_genotype, validate

    no_sum = CatalogConfig.from_names(["conv", "atte", "linear", "relu", "lnorm", "glu"])
    assert all(arity(fn) == 1 for fn in no_sum.enabled)
    shape = TensorShape(2, 6, 16)
    for seed in range(10):
        g = random_genotype(desk_grid_cfg, no_sum, np.random.default_rng(seed))
        if not validate(g, no_sum, shape).decodable:
            continue
        graph = decode(g, no_sum, shape)
        assert all(len(node.inputs) == 1 for node in graph.nodes)
