"""
Claim frequency/severity ingestion for the real-data pipeline

Frequency CSV: policy_id,claim_count (optionally region)
Severity CSV:  policy_id,claim_amount, one row per claim
The public freMTPL2 headers IDpol, ClaimNb, ClaimAmount and Region are accepted as aliases.
"""

import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

from tools.count_law import CountLaw
from tools.ecf_tools import Sample
from tools.errors import (JoinMismatch, NonpositiveAmount, SchemaError,
                          UnsupportedCount)

COLUMN_ALIASES = {
    "IDpol": "policy_id",
    "ClaimNb": "claim_count",
    "ClaimAmount": "claim_amount",
    "Region": "region",
}
FREQ_COLUMNS = ("policy_id", "claim_count")
SEV_COLUMNS = ("policy_id", "claim_amount")
REJECTION_COLUMNS = ["policy_id", "reason", "detail"]

PathLike = Union[str, os.PathLike]


@dataclass
class ClaimsDataset:
    """Policies with at least one claim, their counts and claim amounts."""

    policy_ids: List[str]
    counts: np.ndarray
    amounts: List[np.ndarray]
    rejections: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=REJECTION_COLUMNS))
    source: str = ""
    dropped_zero_counts: int = 0

    @property
    def n(self) -> int:
        return len(self.policy_ids)

    @property
    def log_totals(self) -> np.ndarray:
        """X_i = sum_j log(amount_ij)."""
        return np.array([float(np.sum(np.log(a))) for a in self.amounts])

    @property
    def sample(self) -> Sample:
        return Sample(self.log_totals, provenance=f"claims:{self.source}")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"policy_id": self.policy_ids, "claim_count": self.counts, "x": self.log_totals})

    def write_rejections(self, path: PathLike) -> str:
        self.rejections.to_csv(path, index=False)
        return str(path)


def _read_table(path: PathLike, required, label: str) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=str, encoding="utf-8", skipinitialspace=True)
    except FileNotFoundError:
        raise SchemaError(f"{label} file not found: {path}") from None
    except pd.errors.EmptyDataError:
        raise SchemaError(f"{label} file is empty: {path}") from None
    frame = frame.rename(columns={c: COLUMN_ALIASES.get(c.strip(), c.strip()) for c in frame.columns})
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise SchemaError(f"{label} file {path} lacks column(s): {', '.join(missing)}", missing=missing)
    if frame.empty:
        raise SchemaError(f"{label} file has no data rows: {path}")
    frame["policy_id"] = frame["policy_id"].str.strip()
    return frame


def ingest_claims(
    freq_csv: PathLike,
    sev_csv: PathLike,
    region: Optional[str] = None,
    strict: bool = False,
) -> ClaimsDataset:
    """
    Inner-join frequency and severity files into a claims dataset

    Policies with zero claims are dropped. Policies whose count disagrees with
    the number of severity rows, or with a nonpositive amount, are rejected and
    listed in dataset.rejections together with policies present in one file only.

    Args:
        freq_csv: Frequency CSV path
        sev_csv: Severity CSV path
        region: Keep only policies of this region (needs a region column)
        strict: Raise on the first rejected record instead of reporting it

    Returns:
        ClaimsDataset in frequency-file order

    Raises:
        SchemaError: Missing columns, empty files or unparsable values
        JoinMismatch: (strict) count differs from the number of severity rows
        NonpositiveAmount: (strict) claim amount <= 0
    """
    freq = _read_table(freq_csv, FREQ_COLUMNS, "frequency")
    sev = _read_table(sev_csv, SEV_COLUMNS, "severity")
    rejections: List[Dict[str, str]] = []

    def reject(policy_id: str, reason: str, detail: str, error_type=None):
        if strict and error_type is not None:
            raise error_type(f"policy {policy_id}: {detail}", policy_id=policy_id)
        rejections.append({"policy_id": policy_id, "reason": reason, "detail": detail})

    all_freq_ids = set(freq["policy_id"])
    if region is not None:
        if "region" not in freq.columns:
            raise SchemaError(f"region filter '{region}' needs a region column in {freq_csv}")
        freq = freq[freq["region"].str.strip() == region]

    counts = pd.to_numeric(freq["claim_count"], errors="coerce")
    amounts = pd.to_numeric(sev["claim_amount"], errors="coerce")
    sev = sev.assign(claim_amount=amounts)
    bad_amount_ids = set(sev.loc[sev["claim_amount"].isna(), "policy_id"])
    groups = sev.groupby("policy_id", sort=False)["claim_amount"].apply(list).to_dict()

    policy_ids: List[str] = []
    kept_counts: List[int] = []
    kept_amounts: List[np.ndarray] = []
    dropped_zero = 0
    seen = set()
    for policy_id, count in zip(freq["policy_id"], counts):
        if policy_id in seen:
            reject(policy_id, "duplicate_policy", "policy listed twice in the frequency file", SchemaError)
            continue
        seen.add(policy_id)
        if pd.isna(count) or count < 0 or count != int(count):
            reject(policy_id, "invalid_count", "claim_count is not a nonnegative integer", SchemaError)
            continue
        count = int(count)
        if count == 0:
            dropped_zero += 1
            continue
        if policy_id not in groups:
            reject(policy_id, "missing_severity", f"{count} claim(s) but no severity rows")
            continue
        if policy_id in bad_amount_ids:
            reject(policy_id, "invalid_amount", "claim_amount is not numeric", SchemaError)
            continue
        values = np.asarray(groups[policy_id], dtype=float)
        if values.size != count:
            reject(policy_id, "count_mismatch", f"claim_count={count} but {values.size} severity rows", JoinMismatch)
            continue
        if np.any(values <= 0.0):
            reject(policy_id, "nonpositive_amount", f"amount {values[values <= 0.0][0]:g} <= 0", NonpositiveAmount)
            continue
        policy_ids.append(policy_id)
        kept_counts.append(count)
        kept_amounts.append(values)

    for policy_id in groups:
        if policy_id not in all_freq_ids:
            reject(policy_id, "missing_frequency", "severity rows without a frequency record")

    return ClaimsDataset(
        policy_ids=policy_ids,
        counts=np.asarray(kept_counts, dtype=np.int64),
        amounts=kept_amounts,
        rejections=pd.DataFrame(rejections, columns=REJECTION_COLUMNS),
        source=os.path.basename(str(freq_csv)),
        dropped_zero_counts=dropped_zero,
    )


def serialize_claims(dataset: ClaimsDataset, freq_path: PathLike, sev_path: PathLike) -> Dict[str, str]:
    """Write a dataset back in the ingestion schema."""
    freq = pd.DataFrame({"policy_id": dataset.policy_ids, "claim_count": dataset.counts})
    sev = pd.DataFrame(
        {
            "policy_id": [pid for pid, a in zip(dataset.policy_ids, dataset.amounts) for _ in a],
            "claim_amount": np.concatenate(dataset.amounts) if dataset.amounts else np.zeros(0),
        }
    )
    freq.to_csv(freq_path, index=False)
    sev.to_csv(sev_path, index=False)
    return {"frequency": str(freq_path), "severity": str(sev_path)}


def fit_two_point(dataset: ClaimsDataset) -> CountLaw:
    """
    Two-point law with p = share of policies with exactly one claim

    p = 1 gives the degenerate law N == 1; p = 0 gives N == 2 as tabulated([0, 1]).

    Raises:
        UnsupportedCount: If some policy has more than two claims
    """
    counts = np.asarray(dataset.counts)
    if counts.size == 0:
        raise UnsupportedCount("dataset has no policies")
    too_many = np.flatnonzero(counts > 2)
    if too_many.size:
        j = int(too_many[0])
        raise UnsupportedCount(
            f"policy {dataset.policy_ids[j]} has {counts[j]} claims; the two-point fit needs counts in {{1, 2}}",
            policy_id=dataset.policy_ids[j],
        )
    p_hat = float(np.mean(counts == 1))
    if p_hat == 0.0:
        return CountLaw.tabulated([0.0, 1.0])
    return CountLaw.two_point(p_hat)
