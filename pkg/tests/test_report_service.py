from fractions import Fraction

import orjson
import pytest
from pydantic import ValidationError

from models import ExperimentSpec, GeneratorKind, RunReport, format_rational, parse_rational
from services.errors import CertificateError, GeometryError
from services.exact_geometry import HalfSpace
from services.report_service import (
    certificate_from_dict,
    certificate_to_dict,
    configuration_from_dict,
    configuration_to_dict,
    dumps,
    halfspace_from_dict,
    load_certificate,
    load_configuration,
    results_bytes,
    save_configuration,
    write_report,
)
from services.split_service import split_capacity, validate_certificate


class TestRationals:
    @pytest.mark.parametrize("text,value", [("3", Fraction(3)), ("-6/4", Fraction(-3, 2)), (" 1/3 ", Fraction(1, 3))])
    def test_parse(self, text, value):
        assert parse_rational(text) == value

    @pytest.mark.parametrize("text", ["0.5", "1/0", "1/-2", "a/b", ""])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            parse_rational(text)

    def test_parse_needs_a_string(self):
        with pytest.raises(ValueError):
            parse_rational(0.5)

    def test_format_is_always_a_fraction(self):
        assert format_rational(2) == "2/1"
        assert format_rational(Fraction(-2, 4)) == "-1/2"


class TestConfigurationFiles:
    def test_round_trip(self, perfect_triples, tmp_path):
        config, _ = perfect_triples
        path = save_configuration(config, str(tmp_path / "sub" / "config.json"))
        assert load_configuration(path) == config

    def test_values_are_strings(self, two_pairs):
        data = configuration_to_dict(two_pairs)
        assert data["classes"][0] == [["-1/1"], ["1/1"]]

    def test_wrong_class_size(self):
        with pytest.raises(GeometryError, match="expected r=2"):
            configuration_from_dict({"d": 1, "r": 2, "classes": [[["0"], ["1"], ["2"]]]})

    def test_wrong_dimension(self):
        with pytest.raises(GeometryError, match="expected d=2"):
            configuration_from_dict({"d": 2, "r": 2, "classes": [[["0", "0"], ["1"]]]})

    def test_float_coordinates_are_refused(self):
        with pytest.raises(GeometryError, match=r"classes\[0\]\[1\]\[0\]"):
            configuration_from_dict({"d": 1, "r": 2, "classes": [[["0"], ["0.5"]]]})

    def test_broken_json_names_the_position(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"d": 1,\n "r": }')
        with pytest.raises(GeometryError, match="line 2"):
            load_configuration(str(path))

    @pytest.mark.parametrize("data", [{"d": 1, "r": 1, "classes": [[["0"]], [["1"]]]}, {"d": 1, "r": 2, "classes": []}])
    def test_degenerate_configurations(self, data):
        with pytest.raises(GeometryError):
            configuration_from_dict(data)

    def test_missing_file(self, tmp_path):
        with pytest.raises(GeometryError):
            load_configuration(str(tmp_path / "nope.json"))


class TestCertificates:
    def test_round_trip_still_verifies(self, tmp_path):
        from services.split_service import generate_random_config

        config = generate_random_config(3, 2, 2, seed=3)
        certificate = split_capacity(config).certificate
        path = tmp_path / "certificate.json"
        path.write_bytes(orjson.dumps(certificate_to_dict(certificate)))
        loaded = load_certificate(str(path))
        assert loaded == certificate
        validate_certificate(loaded, config)

    def test_malformed_half_space(self):
        with pytest.raises(CertificateError):
            halfspace_from_dict({"normal": ["1/1"]})
        with pytest.raises(CertificateError):
            halfspace_from_dict({"normal": ["x"], "offset": "0"})

    def test_malformed_certificate(self):
        with pytest.raises(CertificateError):
            certificate_from_dict({"matchings": {}})

    def test_missing_certificate_file(self, tmp_path):
        with pytest.raises(CertificateError):
            load_certificate(str(tmp_path / "nope.json"))


class TestSerialisation:
    def test_fractions_and_half_spaces(self):
        value = {"p": Fraction(5, 8), "h": HalfSpace.make([1, -1], 0, closed=True), "s": {3, 1}}
        assert orjson.loads(dumps(value)) == {
            "h": {"closed": True, "normal": ["1/1", "-1/1"], "offset": "0/1"},
            "p": "5/8",
            "s": [1, 3],
        }

    def test_unknown_objects_are_refused(self):
        with pytest.raises(TypeError):
            dumps({"x": object()})

    def test_write_report(self, tmp_path):
        report = RunReport(command="constants", success=True, spec={}, seed=0, version="0",
                           results={"p": Fraction(2, 3)}, wall_time=1.5)
        written = write_report(report, str(tmp_path), "both", rows=[{"r": 3, "p_r": Fraction(2, 3)}],
                               columns=["r", "p_r"])
        assert [p.rsplit("/", 1)[-1] for p in written] == ["constants.json", "constants.csv"]
        assert orjson.loads((tmp_path / "constants.json").read_bytes())["results"] == {"p": "2/3"}
        assert (tmp_path / "constants.csv").read_text().splitlines() == ["r,p_r", "3,2/3"]
        assert results_bytes(report) == orjson.dumps({"p": "2/3"}, option=orjson.OPT_INDENT_2)


class TestExperimentSpec:
    def test_defaults(self):
        spec = ExperimentSpec(command="tolerance")
        assert (spec.kind, spec.N, spec.r, spec.d, spec.seed) == (GeneratorKind.RANDOM, 4, 2, 2, 0)

    @pytest.mark.parametrize("field,value", [("r", 1), ("N", 0), ("d", 0), ("seed", -1), ("seed", 2 ** 64),
                                             ("trials", 0), ("mode", "fast")])
    def test_out_of_range(self, field, value):
        with pytest.raises(ValidationError):
            ExperimentSpec(command="x", **{field: value})

    def test_from_file_needs_a_path(self):
        with pytest.raises(ValidationError):
            ExperimentSpec(command="x", kind="from_file")

    def test_nested_pairs_are_pairs(self):
        with pytest.raises(ValidationError):
            ExperimentSpec(command="x", kind="nested_pairs", r=3)
