import math
import os

import numpy as np
import pytest

from tools.claims_tools import fit_two_point, ingest_claims, serialize_claims
from tools.count_law import CountLaw
from tools.errors import (JoinMismatch, NonpositiveAmount, SchemaError,
                          UnsupportedCount)


def write_pair(tmp_path, freq_rows, sev_rows, freq_header="policy_id,claim_count", sev_header="policy_id,claim_amount"):
    freq = tmp_path / "freq.csv"
    sev = tmp_path / "sev.csv"
    freq.write_text("\n".join([freq_header] + freq_rows) + "\n", encoding="utf-8")
    sev.write_text("\n".join([sev_header] + sev_rows) + "\n", encoding="utf-8")
    return freq, sev


class TestFixture:
    def test_region_filter(self, claims_dir):
        dataset = ingest_claims(os.path.join(claims_dir, "freq.csv"), os.path.join(claims_dir, "sev.csv"), region="R26")
        assert dataset.n == 345
        assert dataset.dropped_zero_counts == 20
        assert dataset.rejections.empty
        assert set(dataset.counts) == {1, 2}

    def test_two_point_fit(self, claims_dir):
        dataset = ingest_claims(os.path.join(claims_dir, "freq.csv"), os.path.join(claims_dir, "sev.csv"), region="R26")
        law = fit_two_point(dataset)
        assert law.family == "two_point"
        assert law.p == pytest.approx(311 / 345)

    def test_all_regions(self, claims_dir):
        dataset = ingest_claims(os.path.join(claims_dir, "freq.csv"), os.path.join(claims_dir, "sev.csv"))
        assert dataset.n == 357
        assert np.all(np.isfinite(dataset.log_totals))


class TestIngestion:
    def test_log_totals(self, tmp_path):
        freq, sev = write_pair(tmp_path, ["A,2", "B,1"], [f"A,{math.e!r}", f"A,{math.e ** 2!r}", "B,1.0"])
        dataset = ingest_claims(freq, sev)
        np.testing.assert_allclose(dataset.log_totals, [3.0, 0.0], atol=1e-12)
        assert dataset.sample.n == 2
        assert list(dataset.to_frame().columns) == ["policy_id", "claim_count", "x"]

    def test_public_column_names(self, tmp_path):
        freq, sev = write_pair(
            tmp_path, ["7,1,R11"], ["7,120.5"],
            freq_header="IDpol,ClaimNb,Region", sev_header="IDpol,ClaimAmount",
        )
        dataset = ingest_claims(freq, sev, region="R11")
        assert dataset.policy_ids == ["7"]

    def test_rejections_are_reported(self, tmp_path):
        freq, sev = write_pair(
            tmp_path,
            ["A,2", "B,1", "C,1", "D,0", "E,1.5", "F,1"],
            ["A,10", "B,-3", "C,5", "C,6", "G,4", "F,abc"],
        )
        dataset = ingest_claims(freq, sev)
        reasons = dict(zip(dataset.rejections["policy_id"], dataset.rejections["reason"]))
        assert reasons == {
            "A": "count_mismatch",
            "B": "nonpositive_amount",
            "C": "count_mismatch",
            "E": "invalid_count",
            "F": "invalid_amount",
            "G": "missing_frequency",
        }
        assert dataset.n == 0
        assert dataset.dropped_zero_counts == 1

    def test_missing_severity(self, tmp_path):
        freq, sev = write_pair(tmp_path, ["A,1", "B,1"], ["A,10"])
        dataset = ingest_claims(freq, sev)
        assert dataset.policy_ids == ["A"]
        assert list(dataset.rejections["reason"]) == ["missing_severity"]

    def test_strict_mode(self, tmp_path):
        freq, sev = write_pair(tmp_path, ["A,2"], ["A,10"])
        with pytest.raises(JoinMismatch) as info:
            ingest_claims(freq, sev, strict=True)
        assert info.value.policy_id == "A"
        freq, sev = write_pair(tmp_path, ["A,1"], ["A,0"])
        with pytest.raises(NonpositiveAmount):
            ingest_claims(freq, sev, strict=True)

    def test_schema_errors(self, tmp_path):
        freq, sev = write_pair(tmp_path, ["A,1"], ["A,10"], sev_header="policy_id,amount")
        with pytest.raises(SchemaError):
            ingest_claims(freq, sev)
        freq, sev = write_pair(tmp_path, ["A,1"], [])
        with pytest.raises(SchemaError):
            ingest_claims(freq, sev)
        freq, sev = write_pair(tmp_path, ["A,1"], ["A,10"])
        with pytest.raises(SchemaError):
            ingest_claims(freq, sev, region="R26")

    def test_round_trip(self, claims_dir, tmp_path):
        dataset = ingest_claims(os.path.join(claims_dir, "freq.csv"), os.path.join(claims_dir, "sev.csv"), region="R26")
        paths = serialize_claims(dataset, tmp_path / "f.csv", tmp_path / "s.csv")
        again = ingest_claims(paths["frequency"], paths["severity"])
        assert again.policy_ids == dataset.policy_ids
        np.testing.assert_array_equal(again.counts, dataset.counts)
        np.testing.assert_allclose(again.log_totals, dataset.log_totals, rtol=1e-12)


class TestTwoPointFit:
    def test_three_claims(self, tmp_path):
        freq, sev = write_pair(tmp_path, ["A,3"], ["A,1", "A,2", "A,3"])
        with pytest.raises(UnsupportedCount):
            fit_two_point(ingest_claims(freq, sev))

    def test_all_single_claims(self, tmp_path):
        freq, sev = write_pair(tmp_path, ["A,1", "B,1"], ["A,1", "B,2"])
        assert fit_two_point(ingest_claims(freq, sev)) == CountLaw.two_point(1.0)

    def test_all_double_claims(self, tmp_path):
        freq, sev = write_pair(tmp_path, ["A,2"], ["A,1", "A,2"])
        assert fit_two_point(ingest_claims(freq, sev)) == CountLaw.tabulated([0.0, 1.0])
