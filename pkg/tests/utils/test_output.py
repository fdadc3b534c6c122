"""Unit tests for the CSV, JSON and SVG writers."""

import json
import math
import os
import sys
import tempfile
import unittest
from pathlib import Path

# Add project root to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "..")))

import numpy as np
from pydantic import ValidationError

from core.chain_model import build_correlations, g_infinite, h_infinite
from core.entanglement import analyze_block, report_to_dict
from core.interfaces import BlockPartition, ChainSpec
from utils.output import (format_value, plot_correlations, plot_modes, plot_regime_map,
                          read_csv_columns, write_csv, write_json)


class TestFormatting(unittest.TestCase):
    """Test suite for CSV cell formatting."""

    def test_reals_keep_full_precision(self):
        self.assertEqual(format_value(0.1), "0.10000000000000001")
        self.assertEqual(float(format_value(math.pi)), math.pi)
        self.assertEqual(format_value(np.float64(2.5)), "2.5")

    def test_other_values(self):
        self.assertEqual(format_value(True), "true")
        self.assertEqual(format_value(np.int64(7)), "7")
        self.assertEqual(format_value(math.inf), "inf")
        self.assertEqual(format_value(-math.inf), "-inf")
        self.assertEqual(format_value(math.nan), "nan")
        self.assertEqual(format_value(None), "")
        self.assertEqual(format_value("II"), "II")


class TestWriters(unittest.TestCase):
    """Test suite for the file writers."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.out = Path(self.tmp.name)

    def test_csv_round_trip(self):
        path = write_csv(self.out / "nested" / "table.csv", ["l", "g"], [(0, 0.25), (1, 1.0 / 3.0)])
        self.assertTrue(path.exists())
        columns = read_csv_columns(path)
        self.assertEqual(columns["l"], ["0", "1"])
        self.assertEqual(float(columns["g"][1]), 1.0 / 3.0)
        self.assertTrue(path.read_text().endswith("\n"))

    def test_csv_rejects_ragged_rows(self):
        with self.assertRaises(ValueError):
            write_csv(self.out / "bad.csv", ["a", "b"], [(1, 2, 3)])

    def test_json_report(self):
        table = build_correlations(ChainSpec.from_xi(64, 1.0))
        report = report_to_dict(analyze_block(table, BlockPartition(0, 4)))
        path = write_json(self.out / "modes.json", report)
        with open(path) as f:
            data = json.load(f)
        self.assertIn("lambda", data["modes"][0])
        self.assertEqual(data["partition"]["N_b"], 4)
        self.assertEqual(len(data["modes"][0]["u_A"]), 4)
        self.assertAlmostEqual(data["total"], report["total"], places=15)

    def test_json_rejects_invalid_report(self):
        with self.assertRaises(ValidationError):
            write_json(self.out / "bad.json", {"total": -1.0})

    def test_svg_is_reproducible(self):
        spec = ChainSpec.from_xi(64, 2.0)
        table = build_correlations(spec)
        rows = [(l, table.g[l], table.h[l], g_infinite(l, spec), h_infinite(l, spec)) for l in range(12)]
        first = plot_correlations(self.out / "a.svg", rows, spec.xi).read_bytes()
        second = plot_correlations(self.out / "b.svg", rows, spec.xi).read_bytes()
        self.assertEqual(first, second)
        self.assertIn(b"<svg", first)

    def test_mode_and_regime_figures(self):
        table = build_correlations(ChainSpec.from_xi(64, 1.0))
        report = report_to_dict(analyze_block(table, BlockPartition(0, 6)))
        self.assertTrue(plot_modes(self.out / "modes.svg", report, 3).exists())
        rows = [(xi, nb, xi * math.log(nb), 0.5 * xi, 2.0 + xi)
                for xi in (0.5, 1.0, 2.0) for nb in (4, 8, 16)]
        self.assertTrue(plot_regime_map(self.out / "map.svg", rows).exists())


if __name__ == "__main__":
    unittest.main()
