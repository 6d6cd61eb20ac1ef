import itertools

import pytest
from hypothesis import given, strategies as st

from helmetuse.errors import ParseError, ValidationError
from helmetuse.taxonomy import (HelmetClass, Position, RiderConfig, decode,
                                encode, enumerate_classes, rider_stats)

from reference_data import CLASS_RESULTS


def cfg(*riders):
    return RiderConfig([(Position(p), h) for p, h in riders])


class TestEncode:
    def test_single_helmeted_driver(self):
        assert encode(cfg(("D", True))) == "DHelmet"

    def test_driver_and_passenger(self):
        assert encode(cfg(("D", True), ("P1", False))) == "DHelmetP1NoHelmet"

    def test_input_order_irrelevant(self):
        shuffled = cfg(("P2", False), ("P1", False), ("P0", False), ("D", False))
        assert encode(shuffled) == "DNoHelmetP0NoHelmetP1NoHelmetP2NoHelmet"

    def test_empty_config_rejected(self):
        with pytest.raises(ValidationError, match="at least one rider"):
            RiderConfig([])

    def test_missing_driver_rejected(self):
        with pytest.raises(ValidationError, match="driver"):
            cfg(("P1", True))

    def test_duplicate_position_rejected(self):
        with pytest.raises(ValidationError, match="duplicate"):
            cfg(("D", True), ("D", False))


class TestDecode:
    def test_driver_no_helmet(self):
        assert decode("DNoHelmet") == cfg(("D", False))

    def test_three_riders(self):
        assert decode("DHelmetP1NoHelmetP2Helmet") == cfg(
            ("D", True), ("P1", False), ("P2", True))

    def test_non_canonical_order_rejected(self):
        with pytest.raises(ParseError, match="order"):
            decode("P1HelmetDHelmet")

    def test_unknown_position_rejected(self):
        with pytest.raises(ParseError, match="position token"):
            decode("DHelmetQ1Helmet")

    def test_malformed_segment_has_offset(self):
        with pytest.raises(ParseError) as exc_info:
            decode("DHelmetP1Helm")
        assert exc_info.value.offset == 9

    def test_empty_label_rejected(self):
        with pytest.raises(ParseError):
            decode("")

    def test_helmet_never_matches_inside_nohelmet(self):
        config = decode("DNoHelmet")
        assert config.riders == ((Position.D, False),)


class TestRiderStats:
    @pytest.mark.parametrize("label, expected", [
        ("DHelmet", (1, 1)),
        ("DHelmetP1NoHelmetP2Helmet", (3, 2)),
        ("DNoHelmetP0NoHelmetP1NoHelmetP2NoHelmet", (4, 0)),
    ])
    def test_counts(self, label, expected):
        assert rider_stats(decode(label)) == expected

    def test_consistent_with_label_segments(self):
        # every segment contains "Helmet" exactly once; "NoHelmet" marks the
        # unhelmeted ones
        for c in enumerate_classes(5):
            riders, helmeted = rider_stats(c.config)
            assert riders == c.label.count("Helmet")
            assert helmeted == c.label.count("Helmet") - c.label.count("NoHelmet")


class TestEnumerate:
    def test_driver_only(self):
        assert [c.label for c in enumerate_classes(1)] == ["DHelmet", "DNoHelmet"]

    def test_two_riders_exhaustive(self):
        # independent brute force: driver alone, or driver plus one of four
        # passenger seats, each rider helmeted or not
        count = 2 + 4 * 2 * 2
        got = enumerate_classes(2)
        assert len(got) == count
        assert len({c.label for c in got}) == count

    def test_order_by_count_then_label(self):
        classes = enumerate_classes(3)
        keys = [(c.config.rider_count, c.label) for c in classes]
        assert keys == sorted(keys)

    def test_bounds_checked(self):
        with pytest.raises(ValidationError):
            enumerate_classes(0)
        with pytest.raises(ValidationError):
            enumerate_classes(6)

    def test_contains_all_published_patterns(self):
        labels = {c.label for c in enumerate_classes(5)}
        for label, _, _ in CLASS_RESULTS:
            assert label in labels


class TestRoundTrip:
    def test_all_enumerated_classes_round_trip(self):
        for c in enumerate_classes(5):
            assert decode(encode(c.config)) == c.config
            assert HelmetClass.from_label(c.label) == c

    def test_canonical_segment_order(self):
        order = [p.value for p in Position]
        for c in enumerate_classes(5):
            positions = [p.value for p, _ in decode(c.label).riders]
            assert positions == sorted(positions, key=order.index)


@st.composite
def rider_configs(draw):
    passengers = draw(st.sets(st.sampled_from(
        [Position.P0, Position.P1, Position.P2, Position.P3]), max_size=4))
    positions = [Position.D, *passengers]
    helmets = draw(st.lists(st.booleans(), min_size=len(positions),
                            max_size=len(positions)))
    return RiderConfig(zip(positions, helmets))


@given(rider_configs())
def test_round_trip_property(config):
    assert decode(encode(config)) == config


@given(rider_configs())
def test_stats_bounds(config):
    riders, helmeted = rider_stats(config)
    assert 1 <= riders <= 5
    assert 0 <= helmeted <= riders
