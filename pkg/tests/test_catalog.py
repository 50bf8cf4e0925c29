import math

import numpy as np
import pytest

from thetacaf import catalog
from thetacaf.errors import GeneratorUnavailable, UnknownLattice
from thetacaf.lattice import minimal_norm


class TestEntries:
    def test_lambda4_4(self):
        e = catalog.get("Lambda4_4")
        assert e.lambda1 == 5.0
        assert e.volume == 20.0
        assert e.power_P == 20.0

    def test_a2(self):
        e = catalog.get("A2")
        assert e.lambda1 == 1.0
        assert e.volume == pytest.approx(math.sqrt(3.0 / 4.0))

    def test_z3_power_and_codebook(self):
        e = catalog.get("Zn", 3)
        assert e.power_P == 4.0
        assert e.codebook_size == 343

    def test_unknown(self):
        with pytest.raises(UnknownLattice):
            catalog.get("nope")

    def test_dimension_required(self):
        with pytest.raises(UnknownLattice):
            catalog.get("Zn")

    def test_generatorless_entries(self):
        for name in ("K12", "Leech"):
            e = catalog.get(name)
            assert e.generator is None
            with pytest.raises(GeneratorUnavailable):
                e.lattice()

    def test_names_complete(self):
        assert set(catalog.names()) == {
            "Zn", "Dn", "Dn_star", "A2", "A3", "E8", "K12", "Leech",
            "Lambda4_3", "Lambda3_4", "Lambda4_4", "GoldenQ5",
        }


class TestGeneratorData:
    @pytest.mark.parametrize(
        "name,n,lam1,vol",
        [
            ("Zn", 3, 1.0, 1.0),
            ("Dn", 3, 2.0, 2.0),
            ("Dn", 4, 2.0, 2.0),
            ("Dn_star", 3, 3.0, 4.0),
            ("A2", None, 1.0, math.sqrt(0.75)),
            ("E8", None, 2.0, 1.0),
            ("Lambda4_3", None, 5.0, 10.0),
            ("Lambda3_4", None, 3.0, 8.0),
            ("Lambda4_4", None, 5.0, 20.0),
            ("GoldenQ5", None, 2.0, math.sqrt(5.0)),
        ],
    )
    def test_enumerated_matches_tabulated(self, name, n, lam1, vol):
        e = catalog.get(name, n)
        lat = e.lattice()
        got_lam1, _ = minimal_norm(lat)
        assert got_lam1 == pytest.approx(lam1, abs=1e-9)
        assert lat.volume == pytest.approx(vol, abs=1e-9)

    def test_e8_kissing(self):
        _, kissing = minimal_norm(catalog.get("E8").lattice())
        assert kissing == 240

    def test_generic_dn(self):
        lat = catalog.get("Dn", 5).lattice()
        lam1, _ = minimal_norm(lat)
        assert lam1 == pytest.approx(2.0)
        assert lat.volume == pytest.approx(2.0)

    def test_a3_congruent_to_d3(self):
        a3 = catalog.get("A3")
        assert a3.dim == 3 and a3.lambda1 == 2.0 and a3.volume == 2.0


class TestValidateCatalog:
    def test_all_pass(self):
        report = catalog.validate_catalog(coeff_norm=8)
        failures = [e for e in report if not e["passed"]]
        assert not failures, failures

    def test_report_covers_generatorless(self):
        report = catalog.validate_catalog(coeff_norm=4)
        names = {e["name"] for e in report}
        assert "Leech" in names and "K12" in names
