import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from interlink.core import InterlayerPattern, LayerGraph, MultilayerNetwork
from interlink.errors import ParseError
from interlink.formats import (csv_text, dumps, format_network, is_parameter_file, loads, parse_network,
                               parse_parameters, read_csv, run_report, to_tree, write_csv)
from interlink.generators import geometric_layer

K2 = """# two K2 layers
layer1 2
layer2 2
e1 0 1
e2 0 1 2.5
pattern all
"""


def test_minimal_document():
    net = parse_network(K2)
    assert (net.n, net.m) == (2, 2)
    assert len(net.pattern) == 4
    assert net.layer2.edges == ((0, 1, 2.5),)


@pytest.mark.parametrize("text, line", [
    (K2.replace("e1 0 1", "e1 0 2"), 4),
    (K2.replace("e1 0 1", "e1 0 1\ne1 1 0"), 5),
    (K2.replace("e1 0 1", "edge 0 1"), 4),
    (K2.replace("e1 0 1", "e1 0 x"), 4),
    (K2.replace("e1 0 1", "e1 0 1 -1"), 4),
    (K2.replace("e1 0 1", "e1 1 1"), 4),
    (K2.replace("pattern all", "pattern all\ninter 0 0"), 7),
    (K2.replace("pattern all", "pattern spiral"), 6),
    (K2.replace("pattern all", ""), 5),
    ("layer1 2\nlayer1 3\n", 2),
    ("e1 0 1\n", 1),
])
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(ParseError) as info:
        parse_network(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_k2k_count():
    text = "layer1 6\nlayer2 6\n" + "".join(f"e1 {i} {i + 1}\ne2 {i} {i + 1}\n" for i in range(5)) + "pattern k2k 2\n"
    net = parse_network(text)
    assert len(net.pattern) == 12
    assert set(net.pattern.pairs) == set(InterlayerPattern.k_to_k(6, 2).pairs)
    assert all(sum(1 for i, _ in net.pattern.pairs if i == v) == 2 for v in range(6))


def test_explicit_pattern():
    text = "layer1 2\nlayer2 3\ne1 0 1\ne2 0 1\ne2 1 2\ninter 0 2\ninter 1 0\npattern explicit\n"
    net = parse_network(text)
    assert set(net.pattern.pairs) == {(0, 2), (1, 0)}


def test_one2one_needs_equal_sizes():
    with pytest.raises(ParseError):
        parse_network("layer1 2\nlayer2 3\ne1 0 1\ne2 0 1\ne2 1 2\npattern one2one\n")


def test_disconnected_layer_allowed():
    net = parse_network("layer1 3\nlayer2 2\ne1 0 1\ne2 0 1\npattern all\n")
    assert net.layer1.edges == ((0, 1, 1.0),) and len(net.pattern) == 6



@pytest.mark.parametrize("pattern", [None, "one2one", "k2k"])
def test_round_trip(pattern):
    g1, g2 = geometric_layer(7, seed=2), geometric_layer(7, seed=3)
    pat = {None: InterlayerPattern.all_pairs(7, 7), "one2one": InterlayerPattern.one_to_one(7),
           "k2k": InterlayerPattern.k_to_k(7, 3)}[pattern]
    net = MultilayerNetwork(g1, g2, pat)
    back = parse_network(format_network(net))
    assert back.layer1.edges == net.layer1.edges and back.layer2.edges == net.layer2.edges
    assert back.pattern.pairs == net.pattern.pairs
    assert np.array_equal(back.layer1.laplacian(), net.layer1.laplacian())


def test_explicit_round_trip():
    net = MultilayerNetwork(LayerGraph(2, ((0, 1, 1.0),)), LayerGraph(2, ((0, 1, 1.0),)),
                            InterlayerPattern.explicit(2, 2, [(0, 1), (1, 1)]))
    assert parse_network(format_network(net)).pattern.pairs == net.pattern.pairs


def test_parameters():
    text = "n 30\nm = 15\nlambda2_1 0.6798\nlambda2_2=0.0712\n"
    assert is_parameter_file(text) and not is_parameter_file(K2)
    assert parse_parameters(text) == {"n": 30, "m": 15, "lambda2_1": 0.6798, "lambda2_2": 0.0712}
    with pytest.raises(ParseError):
        parse_parameters("n 30\nm 15\nlambda2_1 1\n")
    with pytest.raises(ParseError) as info:
        parse_parameters("n 30\nq 1\n")
    assert info.value.line == 2


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(allow_nan=True, allow_infinity=True, width=64), max_size=8),
       st.integers(-10**12, 10**12))
def test_report_round_trip(values, k):
    rep = run_report("x", {"seed": k}, values=values, nested={"a": [values, [k]]}, flag=True)
    back = loads(dumps(rep))
    assert back["schema_version"] == 1 and back["inputs"]["seed"] == k
    for a, b in zip(values, back["values"]):
        assert isinstance(b, float)
        assert (math.isnan(a) and math.isnan(b)) or a == b


def test_tree_numpy():
    tree = to_tree({"a": np.arange(3), "b": np.float64(0.1), "c": np.bool_(True)})
    assert tree == {"a": [0, 1, 2], "b": 0.1, "c": True}
    with pytest.raises(TypeError):
        to_tree(object())


def test_csv(tmp_path):
    text = csv_text(["a", "b"], [[1, 0.1], [2, 1 / 3]])
    assert text.splitlines()[0] == "a,b"
    assert "0.33333333333333331" in text
    write_csv(tmp_path / "t.csv", ["a", "b"], [[1, 2.0]])
    header, rows = read_csv(tmp_path / "t.csv")
    assert header == ["a", "b"] and rows == [["1", "2"]]
