import pytest
from hypothesis import given
from hypothesis import strategies as st

from stochpot.config import RunConfig, domain_grid, parse_domain, parse_key_values, parse_point
from stochpot.exceptions import StochpotError
from stochpot.geometry import Ball, Cylinder, Disc, Shell
from stochpot.grf import Exponential, GaussianCorr, WhiteNoise


def test_key_value_parsing_with_comments():
    text = "# header\nseed = 4\n\nlambda=0.5  # amplitude\norders=2,4\n"
    assert parse_key_values(text) == {"seed": "4", "lambda": "0.5", "orders": "2,4"}


def test_malformed_line_rejected():
    with pytest.raises(StochpotError):
        parse_key_values("seed 4")


def test_loads_coerces_types_and_extras():
    cfg = RunConfig.loads("seed=4\nlambda=0.5\norders=2,4\nxi=none\ncustom=abc\n")
    assert cfg.seed == 4 and cfg.lam == 0.5 and cfg.orders == (2, 4)
    assert cfg.xi is None and cfg.extra == {"custom": "abc"}


@given(seed=st.integers(0, 2 ** 31), lam=st.floats(0, 10), xi=st.floats(0.01, 10),
       samples=st.integers(100, 10 ** 6), orders=st.lists(st.integers(1, 8), min_size=1, max_size=4))
def test_dump_load_round_trip(seed, lam, xi, samples, orders):
    cfg = RunConfig(seed=seed, lam=lam, xi=xi, samples=samples, orders=tuple(orders),
                    kernel="exponential", target="noisy-disc")
    assert RunConfig.loads(cfg.dumps()) == cfg


@pytest.mark.parametrize("text", [
    "format=xml", "kernel=bessel", "alpha=0", "lambda=-1", "samples=10", "orders=0", "xi=-2",
    "seed=abc", "lambda=inf", "lambda=none", "orders=",
])
def test_invalid_values_rejected(text):
    with pytest.raises(StochpotError):
        RunConfig.loads(text)


@pytest.mark.parametrize("kind, cls", [("gaussian", GaussianCorr), ("exponential", Exponential),
                                       ("white", WhiteNoise)])
def test_build_kernel(kind, cls):
    k = RunConfig(kernel=kind, alpha=2.0, xi=0.3).build_kernel()
    assert isinstance(k, cls)
    if cls is not WhiteNoise:
        assert k.alpha == 2.0 and k.xi == 0.3


def test_build_kernel_defaults():
    k = RunConfig().build_kernel(0.7, "exponential", "angular")
    assert isinstance(k, Exponential) and k.xi == 0.7 and k.metric == "angular"


@pytest.mark.parametrize("text, cls, kind", [
    ("ball:3:2", Ball, "volume"), ("disc:1.5", Disc, "volume"), ("shell:3:0.5:1", Shell, "volume"),
    ("cylinder:1:2", Cylinder, "volume"), ("sphere:1", Ball, "surface"), ("circle", Disc, "curve"),
])
def test_parse_domain(text, cls, kind):
    dom, measure = parse_domain(text)
    assert isinstance(dom, cls) and measure == kind


@pytest.mark.parametrize("text", ["cube:1", "ball:x"])
def test_parse_domain_errors(text):
    with pytest.raises(StochpotError):
        parse_domain(text)


def test_domain_grid_sizes():
    assert len(domain_grid("circle:1", 64).points) == 64
    assert domain_grid("ball:3:1", 8).points.shape[1] == 3


@pytest.mark.parametrize("text, expected", [("0,0,0.5", (0.0, 0.0, 0.5)), ("1;2", (1.0, 2.0))])
def test_parse_point(text, expected):
    assert parse_point(text) == expected
