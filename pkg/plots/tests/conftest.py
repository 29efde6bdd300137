import numpy as np
import pytest

HEADER = "t_s,policy,gamma_th_db,k_ue,k_bs,snr_db,margin_db,n_beams,T_b_s,outage"


def write_records(path, gamma_th, snrs, policy="ma", scenario="outdoor",
                  seed=0):
    """Write a schema-conformant records CSV from a list of SNR values."""
    lines = [
        "# schema=cambeam-records-v1",
        f"# scenario={scenario} seed={seed} policy={policy}",
        HEADER,
    ]
    for i, snr in enumerate(snrs):
        snr = float(snr)
        margin = gamma_th - snr
        outage = 1 if snr < gamma_th else 0
        lines.append(f"{0.25 * i},{policy},{gamma_th},3,60,{snr!r},"
                     f"{margin!r},1,0.231,{outage}")
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture
def records_csv(tmp_path):
    rng = np.random.default_rng(0)
    snrs = rng.normal(20.0, 5.0, 200)
    return write_records(tmp_path / "run.csv", 17.0, snrs)
