import itertools

import pytest

from celltrainer.codes import (
    INPUT,
    CellStructure,
    CodeFormatError,
    decode_structure,
    parse_code,
)

KNOWN = "0,1,2,3/1|10|010|1010"


def test_parse_known_code():
    types, bits = parse_code(KNOWN)
    assert types == (0, 1, 2, 3)
    assert bits == (1, 1, 0, 0, 1, 0, 1, 0, 1, 0)


@pytest.mark.parametrize(
    "text",
    ["", "0,1", "a,b/1|11", "0,9/1|11", "0,1/1", "0,1/1|1", "0,1/1|12"],
)
def test_parse_rejects_malformed(text):
    with pytest.raises(CodeFormatError):
        parse_code(text)


def test_decode_known_structure():
    s = decode_structure(KNOWN)
    assert s.k == 4 and s.depooling == 5
    # L2 and L4 never reach the DePooling block, so they are dropped
    assert s.kept_layers == (1, 3)
    assert s.edges == frozenset({(INPUT, 1), (1, 3), (1, 5), (3, 5)})


def test_decode_default_connections():
    # nothing wired anywhere: every node would hang off the input, and only
    # the DePooling default edge survives pruning
    s = decode_structure("0,1,2/0|00|000")
    assert s.kept_layers == ()
    assert s.edges == frozenset({(INPUT, s.depooling)})


def test_decode_single_layer():
    s = decode_structure("5/1")
    assert s.kept_layers == (1,)
    assert s.edges == frozenset({(INPUT, 1), (1, 2)})


def test_predecessors_sorted():
    s = decode_structure("0,0,0/1|11|111")
    assert s.predecessors(s.depooling) == (1, 2, 3)


def test_every_cell_keeps_an_input_path():
    # exhaustive at k=3: a path Input -> DePooling always survives pruning
    for bits in itertools.product("01", repeat=6):
        text = "0,1,2/" + bits[0] + "|" + "".join(bits[1:3]) + "|" + "".join(bits[3:6])
        s = decode_structure(text)
        frontier, seen = [INPUT], {INPUT}
        while frontier:
            node = frontier.pop()
            for src, dst in s.edges:
                if src == node and dst not in seen:
                    seen.add(dst)
                    frontier.append(dst)
        assert s.depooling in seen
        for layer in s.kept_layers:
            assert layer in seen


def test_structure_is_frozen():
    s = decode_structure(KNOWN)
    assert isinstance(s, CellStructure)
    with pytest.raises(AttributeError):
        s.k = 7
