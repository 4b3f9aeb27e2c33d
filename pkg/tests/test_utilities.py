import configparser
from argparse import ArgumentTypeError
from datetime import datetime

import pytest
from pytest import mark as m

from netmark.enums import Scenario, TestFunctionId
from netmark.testfun import StoyanCorrelation
from netmark.utilities import file_digest, format_float, \
    is_builtins_module, month_label, non_negative_float, parse_month, \
    positive_float, positive_int, qualified_class_name, valid_month, \
    valid_alpha, valid_scenario, valid_seed, valid_stat


@m.describe("Utilities")
class TestUtilities(object):

    def test_is_builtins_module(self):
        assert is_builtins_module(str.__class__.__module__)
        assert not is_builtins_module(configparser.ConfigParser.__module__)

    def test_qualified_class_name(self):
        name = qualified_class_name(StoyanCorrelation)
        assert name == "netmark.testfun.StoyanCorrelation"
        assert qualified_class_name(int) == "int"

    def test_format_float(self):
        for x in (0.1, 1 / 3, 1e-300, 123456789.123456789):
            assert float(format_float(x)) == x
        assert format_float(2.0) == "2"

    def test_file_digest(self, tmp_path):
        path = tmp_path / "empty"
        path.write_bytes(b"")
        assert file_digest(path) == "e3b0c44298fc1c149afbf4c8996fb924" \
                                    "27ae41e4649b934ca495991b7852b855"

    def test_months(self):
        assert month_label(datetime(2022, 3, 31, 23)) == "2022-03"
        assert parse_month("2022-03") == (2022, 3)
        with pytest.raises(ValueError):
            parse_month("2022-13")


@m.describe("Command line argument types")
class TestArgumentTypes(object):
    @m.context("When valid")
    @m.it("Parses the value")
    def test_valid(self):
        assert valid_stat("variogram") == TestFunctionId.T5_MarkVariogram
        assert valid_scenario("3") == Scenario.Three
        assert valid_seed("0xff") == 255
        assert valid_seed(str(2 ** 64 - 1)) == 2 ** 64 - 1
        assert valid_month("2021-12") == "2021-12"
        assert positive_float("0.5") == 0.5
        assert non_negative_float("0") == 0.0
        assert positive_int("3") == 3
        assert valid_alpha("0.05") == 0.05

    @m.context("When invalid")
    @m.it("Raises ArgumentTypeError")
    def test_invalid(self):
        for parse, value in ((valid_stat, "nonesuch"),
                             (valid_scenario, "4"),
                             (valid_seed, "-1"),
                             (valid_seed, str(2 ** 64)),
                             (valid_month, "2021-1x"),
                             (positive_float, "0"),
                             (non_negative_float, "-1"),
                             (positive_int, "0"),
                             (positive_int, "x"),
                             (valid_alpha, "0"),
                             (valid_alpha, "1"),
                             (valid_alpha, "1.5")):
            with pytest.raises(ArgumentTypeError):
                parse(value)
