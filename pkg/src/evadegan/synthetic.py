"""Seeded synthetic traffic corpus in the NSL-KDD file format.

Produces comma-separated 43-field rows (41 features, attack label,
difficulty) with category-conditional distributions loosely shaped like the
real benchmark: flood attacks light up connection-rate and error-rate
features, login attacks light up content counters, and so on. The point is
a self-contained corpus for demos and pipeline tests, not a statistical
clone of the benchmark; detectors trained on it reach sensible detection
rates and leave room for constrained evasion.

The test writer shifts proportions toward rare attacks and injects a few
tokens and values never seen in training (an unknown service, su_attempted=2)
to exercise the encoder's clamping path.
"""

from __future__ import annotations

import numpy as np

from .nslkdd import FEATURE_NAMES

RATE_FEATURES = {
    "serror_rate",
    "srv_serror_rate",
    "rerror_rate",
    "srv_rerror_rate",
    "same_srv_rate",
    "diff_srv_rate",
    "srv_diff_host_rate",
    "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate",
    "dst_host_srv_serror_rate",
    "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
}

TRAIN_MIX = (("normal", 0.52), ("dos", 0.35), ("probe", 0.065), ("r2l", 0.05), ("u2r", 0.015))
TEST_MIX = (("normal", 0.43), ("dos", 0.32), ("probe", 0.09), ("r2l", 0.13), ("u2r", 0.03))

_NAMES = {
    "normal": ("normal",),
    "dos": ("neptune", "smurf", "back"),
    "probe": ("satan", "ipsweep", "nmap"),
    "u2r": ("buffer_overflow", "rootkit", "loadmodule"),
    "r2l": ("guess_passwd", "warezclient", "ftp_write"),
}
# labels that only ever appear in the test split
_TEST_ONLY_NAMES = {"dos": ("apache2",), "u2r": ("xterm",), "r2l": ("snmpgetattack",)}


def _base_record(rng):
    """A benign-looking connection; attack profiles overwrite pieces of it."""
    rec = dict.fromkeys(FEATURE_NAMES, 0.0)
    rec["duration"] = float(rng.geometric(0.05) - 1) if rng.random() < 0.3 else 0.0
    rec["protocol_type"] = rng.choice(["tcp", "udp", "icmp"], p=[0.72, 0.24, 0.04])
    rec["service"] = rng.choice(
        ["http", "smtp", "domain_u", "ftp_data", "other", "private", "telnet"],
        p=[0.44, 0.12, 0.16, 0.10, 0.08, 0.06, 0.04],
    )
    rec["flag"] = rng.choice(["SF", "REJ", "S0"], p=[0.9, 0.05, 0.05])
    rec["src_bytes"] = float(int(rng.lognormal(5.0, 1.5)))
    rec["dst_bytes"] = 0.0 if rng.random() < 0.15 else float(int(rng.lognormal(6.0, 1.8)))
    rec["logged_in"] = 1.0 if rng.random() < 0.65 else 0.0
    rec["hot"] = float(rng.integers(1, 4)) if rng.random() < 0.1 else 0.0
    rec["num_failed_logins"] = 1.0 if rng.random() < 0.05 else 0.0
    rec["root_shell"] = 1.0 if rng.random() < 0.02 else 0.0
    rec["is_guest_login"] = 1.0 if rng.random() < 0.03 else 0.0
    rec["count"] = float(rng.integers(1, 60))
    rec["srv_count"] = float(rng.integers(1, 40))
    rec["serror_rate"] = rng.uniform(0.0, 0.15)
    rec["rerror_rate"] = rng.uniform(0.0, 0.1)
    rec["same_srv_rate"] = rng.uniform(0.7, 1.0)
    rec["diff_srv_rate"] = rng.uniform(0.0, 0.15)
    rec["dst_host_count"] = float(rng.integers(50, 256))
    rec["dst_host_srv_count"] = float(rng.integers(40, 256))
    rec["dst_host_same_srv_rate"] = rng.uniform(0.7, 1.0)
    rec["dst_host_diff_srv_rate"] = rng.uniform(0.0, 0.1)
    rec["dst_host_same_src_port_rate"] = rng.uniform(0.0, 0.3)
    rec["dst_host_srv_diff_host_rate"] = rng.uniform(0.0, 0.1)
    rec["dst_host_serror_rate"] = rng.uniform(0.0, 0.1)
    rec["dst_host_srv_serror_rate"] = rng.uniform(0.0, 0.1)
    rec["dst_host_rerror_rate"] = rng.uniform(0.0, 0.1)
    rec["dst_host_srv_rerror_rate"] = rng.uniform(0.0, 0.1)
    rec["srv_serror_rate"] = rec["serror_rate"] * rng.uniform(0.5, 1.0)
    rec["srv_rerror_rate"] = rec["rerror_rate"] * rng.uniform(0.5, 1.0)
    return rec


# Attack profiles keep their frozen (functional) features overlapping with
# the benign baseline and put the strongly separable signal in feature sets
# the corresponding mask leaves modifiable, mirroring how the benchmark's
# attacks are mostly told apart.


def _dos(rec, rng):
    # flood traffic; the decisive signal sits in host-based rates + content
    rec["duration"] = 0.0
    rec["protocol_type"] = "tcp" if rng.random() < 0.75 else "icmp"
    rec["service"] = rng.choice(["private", "http", "ecr_i", "other"], p=[0.4, 0.3, 0.2, 0.1])
    rec["flag"] = rng.choice(["SF", "S0", "REJ"], p=[0.6, 0.3, 0.1])
    rec["src_bytes"] = float(int(rng.lognormal(4.5, 1.5)))
    rec["dst_bytes"] = 0.0 if rng.random() < 0.5 else float(int(rng.lognormal(5.0, 1.5)))
    rec["count"] = float(rng.integers(10, 160))
    rec["srv_count"] = float(rng.integers(5, 120))
    rec["serror_rate"] = rng.uniform(0.0, 0.4)
    rec["srv_serror_rate"] = rng.uniform(0.0, 0.4)
    rec["same_srv_rate"] = rng.uniform(0.4, 1.0)
    rec["logged_in"] = 0.0
    rec["hot"] = 0.0
    rec["dst_host_count"] = 255.0 if rng.random() < 0.7 else float(rng.integers(150, 256))
    rec["dst_host_srv_count"] = float(rng.integers(1, 60))
    rec["dst_host_same_srv_rate"] = rng.uniform(0.0, 0.25)
    rec["dst_host_diff_srv_rate"] = rng.uniform(0.3, 1.0)
    rec["dst_host_serror_rate"] = rng.uniform(0.5, 1.0)
    rec["dst_host_srv_serror_rate"] = rng.uniform(0.5, 1.0)
    rec["dst_host_same_src_port_rate"] = rng.uniform(0.4, 1.0)


def _probe(rec, rng):
    rec["protocol_type"] = rng.choice(["tcp", "icmp"], p=[0.7, 0.3])
    rec["service"] = rng.choice(["private", "other", "eco_i"], p=[0.5, 0.3, 0.2])
    rec["flag"] = rng.choice(["REJ", "SF", "RSTR"], p=[0.45, 0.35, 0.2])
    rec["src_bytes"] = float(rng.integers(0, 40))
    rec["dst_bytes"] = 0.0
    rec["logged_in"] = 0.0
    rec["rerror_rate"] = rng.uniform(0.4, 1.0)
    rec["srv_rerror_rate"] = rng.uniform(0.4, 1.0)
    rec["diff_srv_rate"] = rng.uniform(0.3, 0.9)
    rec["same_srv_rate"] = rng.uniform(0.0, 0.3)
    rec["dst_host_count"] = 255.0
    rec["dst_host_srv_count"] = float(rng.integers(1, 30))
    rec["dst_host_same_srv_rate"] = rng.uniform(0.0, 0.15)
    rec["dst_host_diff_srv_rate"] = rng.uniform(0.5, 1.0)
    rec["dst_host_rerror_rate"] = rng.uniform(0.4, 1.0)
    rec["dst_host_srv_rerror_rate"] = rng.uniform(0.4, 1.0)


def _login_attack_traffic_shape(rec, rng):
    # shared time/host-based fingerprint of interactive login-style attacks;
    # these sets are the modifiable ones for the u2r/r2l group
    rec["count"] = float(rng.integers(1, 6))
    rec["srv_count"] = float(rng.integers(1, 6))
    rec["same_srv_rate"] = 1.0
    rec["diff_srv_rate"] = 0.0
    rec["serror_rate"] = rng.uniform(0.0, 0.05)
    rec["srv_serror_rate"] = rng.uniform(0.0, 0.05)
    rec["dst_host_count"] = float(rng.integers(1, 60))
    rec["dst_host_srv_count"] = float(rng.integers(1, 40))
    rec["dst_host_same_srv_rate"] = rng.uniform(0.3, 1.0)
    rec["dst_host_same_src_port_rate"] = rng.uniform(0.4, 1.0)
    rec["dst_host_srv_diff_host_rate"] = rng.uniform(0.1, 0.6)
    rec["dst_host_diff_srv_rate"] = rng.uniform(0.0, 0.3)


def _u2r(rec, rng):
    # privilege escalation: weak content traces that overlap benign noise,
    # so detection leans on the (modifiable) traffic fingerprint
    rec["duration"] = float(rng.integers(0, 500))
    rec["protocol_type"] = "tcp"
    rec["service"] = rng.choice(["telnet", "ftp_data", "other", "http"], p=[0.5, 0.2, 0.2, 0.1])
    rec["flag"] = "SF"
    rec["src_bytes"] = float(int(rng.lognormal(5.5, 1.2)))
    rec["dst_bytes"] = float(int(rng.lognormal(6.0, 1.2)))
    rec["logged_in"] = 1.0
    rec["hot"] = float(rng.integers(1, 4)) if rng.random() < 0.4 else 0.0
    rec["root_shell"] = 1.0 if rng.random() < 0.15 else 0.0
    rec["num_compromised"] = float(rng.integers(1, 3)) if rng.random() < 0.3 else 0.0
    rec["num_root"] = float(rng.integers(1, 4)) if rng.random() < 0.3 else 0.0
    rec["num_file_creations"] = float(rng.integers(1, 3)) if rng.random() < 0.2 else 0.0
    rec["num_shells"] = 1.0 if rng.random() < 0.1 else 0.0
    _login_attack_traffic_shape(rec, rng)


def _r2l(rec, rng):
    rec["duration"] = float(rng.integers(0, 120))
    rec["protocol_type"] = "tcp"
    rec["service"] = rng.choice(["ftp", "telnet", "pop_3", "imap4"], p=[0.4, 0.3, 0.2, 0.1])
    rec["flag"] = rng.choice(["SF", "RSTO"], p=[0.8, 0.2])
    rec["src_bytes"] = float(rng.integers(10, 400))
    rec["dst_bytes"] = float(rng.integers(50, 2000))
    rec["logged_in"] = 1.0 if rng.random() < 0.4 else 0.0
    rec["num_failed_logins"] = float(rng.integers(1, 4)) if rng.random() < 0.5 else 0.0
    rec["hot"] = float(rng.integers(1, 3)) if rng.random() < 0.3 else 0.0
    rec["is_guest_login"] = 1.0 if rng.random() < 0.3 else 0.0
    _login_attack_traffic_shape(rec, rng)
    rec["dst_host_rerror_rate"] = rng.uniform(0.05, 0.4)


_PROFILES = {"dos": _dos, "probe": _probe, "u2r": _u2r, "r2l": _r2l}


def _format_value(name, value):
    if isinstance(value, str):
        return value
    if name in RATE_FEATURES:
        return f"{min(max(value, 0.0), 1.0):.2f}"
    return str(int(round(value)))


def make_record_line(rng, group: str, test_quirks: bool = False) -> str:
    """One NSL-KDD-format line for the given traffic group."""
    rec = _base_record(rng)
    if group != "normal":
        _PROFILES[group](rec, rng)
    names = _NAMES[group]
    if test_quirks and group in _TEST_ONLY_NAMES and rng.random() < 0.15:
        names = _TEST_ONLY_NAMES[group]
    label = names[int(rng.integers(0, len(names)))]
    if test_quirks:
        if rng.random() < 0.01:
            rec["service"] = "http_8001"  # token absent from any training split
        if rng.random() < 0.02:
            rec["su_attempted"] = 2.0
    fields = [_format_value(n, rec[n]) for n in FEATURE_NAMES]
    fields.append(label)
    fields.append(str(int(rng.integers(0, 22))))
    return ",".join(fields)


def write_corpus(path, n_records: int, seed: int, mix=TRAIN_MIX, test_quirks=False) -> None:
    """Write one NSL-KDD-format file with the given category mix."""
    rng = np.random.default_rng(seed)
    groups = [g for g, _ in mix]
    probs = np.array([p for _, p in mix])
    probs = probs / probs.sum()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for _ in range(n_records):
            group = groups[int(rng.choice(len(groups), p=probs))]
            fh.write(make_record_line(rng, group, test_quirks=test_quirks) + "\n")


def write_corpus_pair(train_path, test_path, n_train: int, n_test: int, seed: int) -> None:
    """Write a train/test pair; the test file carries the unseen-token quirks."""
    write_corpus(train_path, n_train, seed, mix=TRAIN_MIX, test_quirks=False)
    write_corpus(test_path, n_test, seed + 1, mix=TEST_MIX, test_quirks=True)
