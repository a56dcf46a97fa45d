import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from fracmax import FractionalMaximalTransformer
from fracmax.corpus import named_function, tent
from fracmax.maximal import Beta, centered_value


def test_tent_value_and_shapes():
    est = FractionalMaximalTransformer("tent", beta=0.5).fit([[0.0]])
    out = est.transform(np.array([[0.0], [0.5], [3.0]]))
    assert out.shape == (3, 3)
    assert out[0, 0] == pytest.approx((2 / 3) ** 1.5, abs=1e-6)
    assert out[0, 1] == pytest.approx(2 / 3, rel=1e-9)
    assert out[0, 2] == pytest.approx(0.0, abs=1e-12)
    assert list(est.get_feature_names_out()) == ["value", "smallest_radius", "derivative"]
    np.testing.assert_allclose(est.transform([0.0, 0.5, 3.0]), out)


def test_clone_and_params():
    est = FractionalMaximalTransformer("plateau", beta=0.25, d=3)
    params = est.get_params()
    assert params["beta"] == 0.25 and params["d"] == 3
    c = clone(est)
    assert c.get_params() == params
    est.set_params(beta=0.75)
    assert est.beta == 0.75 and c.beta == 0.25


def test_not_fitted():
    with pytest.raises(NotFittedError):
        FractionalMaximalTransformer("tent").transform([[0.0]])


def test_fit_errors():
    with pytest.raises(ValueError):
        FractionalMaximalTransformer().fit()
    with pytest.raises(ValueError):
        FractionalMaximalTransformer("tent", beta=1.5).fit()
    with pytest.raises(ValueError):
        FractionalMaximalTransformer("tent", op="truncated").fit()
    with pytest.raises(ValueError):
        FractionalMaximalTransformer("tent", op="other").fit()
    with pytest.raises(TypeError):
        FractionalMaximalTransformer(3.0).fit()


def test_exploratory_beta():
    est = FractionalMaximalTransformer("plateau", beta=1.5, d=3, exploratory=True).fit()
    assert np.all(np.isfinite(est.transform([[1.0]])[:, 0]))


def test_points_in_rd_reduce_to_norms():
    est = FractionalMaximalTransformer("plateau", d=2).fit()
    X = np.array([[0.6, 0.8], [3.0, 4.0]])
    np.testing.assert_allclose(est.transform(X), est.transform([[1.0], [5.0]]))
    with pytest.raises(ValueError):
        est.transform([[-1.0]])
    with pytest.raises(ValueError):
        est.transform(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        est.transform([[np.nan]])


def test_operators():
    X = [[0.5], [1.5]]
    c = FractionalMaximalTransformer("tent").fit().transform(X)
    n = FractionalMaximalTransformer("tent", op="noncentered").fit().transform(X)
    t = FractionalMaximalTransformer("tent", op="truncated", eps=0.1).fit().transform(X)
    assert np.all(n[:, 0] >= c[:, 0] - 1e-9)
    assert np.all(t[:, 0] <= c[:, 0] + 1e-12)
    assert np.all(t[:, 1] >= 0.1 - 1e-12)
    m = FractionalMaximalTransformer("tent", op="mI").fit()
    assert m.transform([[0.8]])[0, 1] <= 0.2 + 1e-12
    # every admissible ball misses the support
    assert m.transform([[2.0]])[0, 0] == 0.0
    with pytest.raises(ValueError):
        m.transform([[0.0]])


def test_profile_inputs():
    p = tent()
    a = FractionalMaximalTransformer(p).fit().transform([[0.2]])
    b = FractionalMaximalTransformer(p.to_dict()).fit().transform([[0.2]])
    np.testing.assert_array_equal(a, b)
    rf = named_function("tent", 2)
    v = FractionalMaximalTransformer(rf, d=2).fit().transform([[0.3]])[0, 0]
    assert v == pytest.approx(centered_value(rf, 0.3, Beta(0.5, 2)).value, rel=1e-12)
    with pytest.raises(ValueError):
        FractionalMaximalTransformer(rf, d=3).fit()


def test_zero_function():
    out = FractionalMaximalTransformer("zero").fit().transform([[1.0]])
    assert out[0, 0] == 0.0 and np.isnan(out[0, 1]) and out[0, 2] == 0.0


def test_in_pipeline():
    pipe = make_pipeline(FunctionTransformer(np.abs), FractionalMaximalTransformer("tent"))
    out = pipe.fit_transform(np.array([[-0.5], [0.5]]))
    np.testing.assert_allclose(out[0], out[1])
