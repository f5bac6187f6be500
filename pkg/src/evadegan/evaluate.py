"""Detection-rate metrics and the (algorithm x attack x setting) experiment grid.

Every grid cell trains a fresh detector on the detector half, measures its
detection rate on the test split's attack records for that group, trains the
adversarial generator against it on the generator half, regenerates the test
attacks adversarially and measures the drop. Cells are seeded independently
from the master seed so any subset of the grid reproduces exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import detectors, gan, nn
from .masks import ABLATION, FUNCTIONAL_ONLY, mask_for
from .nslkdd import AttackCategory, FeatureSchema, build_schema, encode_batch, load_file, split_train

ATTACK_GROUPS = {
    "dos": (AttackCategory.DOS,),
    "u2r_r2l": (AttackCategory.U2R, AttackCategory.R2L),
    "probe": (AttackCategory.PROBE,),
}

LOW_CONFIDENCE_DR = 0.02


class EmptyEvaluationSet(ValueError):
    pass


class UndefinedEIR(ValueError):
    """EIR has no value when the original detection rate is zero."""


class ExperimentCellError(RuntimeError):
    """Wraps a sub-module failure with its experiment-cell coordinates."""


def detection_rate(predictions, total: int | None = None) -> float:
    """Fraction of ground-truth attack records that were labeled attack."""
    predictions = np.asarray(predictions)
    if total is None:
        total = len(predictions)
    if total == 0:
        raise EmptyEvaluationSet("no attack records to evaluate")
    return float((predictions == detectors.LABEL_ATTACK).sum() / total)


def evasion_increase_rate(original_dr: float, adversarial_dr: float) -> float:
    """1 - adversarial/original detection rate."""
    if original_dr <= 0.0:
        raise UndefinedEIR("original detection rate is zero")
    return 1.0 - adversarial_dr / original_dr


@dataclass
class EvalRow:
    algorithm: str
    attack: str
    setting: str
    original_dr: float
    adversarial_dr: float
    eir: float | None
    n_attack_records: int
    n_detected_original: int
    n_detected_adversarial: int
    low_confidence: bool


@dataclass
class EvalReport:
    rows: list = field(default_factory=list)

    CSV_HEADER = (
        "algorithm,attack,setting,original_dr,adversarial_dr,eir,"
        "original_dr_pct,adversarial_dr_pct,eir_pct,"
        "n_attack_records,n_detected_original,n_detected_adversarial,low_confidence"
    )

    def sorted_rows(self):
        return sorted(self.rows, key=lambda r: (r.algorithm, r.attack, r.setting))

    def to_csv_text(self) -> str:
        lines = [self.CSV_HEADER]
        for r in self.sorted_rows():
            eir = "" if r.eir is None else repr(r.eir)
            eir_pct = "" if r.eir is None else f"{100.0 * r.eir:.2f}"
            lines.append(
                f"{r.algorithm},{r.attack},{r.setting},"
                f"{r.original_dr!r},{r.adversarial_dr!r},{eir},"
                f"{100.0 * r.original_dr:.2f},{100.0 * r.adversarial_dr:.2f},{eir_pct},"
                f"{r.n_attack_records},{r.n_detected_original},{r.n_detected_adversarial},"
                f"{str(r.low_confidence).lower()}"
            )
        return "\n".join(lines) + "\n"

    def to_json_obj(self) -> dict:
        out = {}
        for r in self.sorted_rows():
            cell = {
                "original_dr": r.original_dr,
                "adversarial_dr": r.adversarial_dr,
                "eir": r.eir,
                "n_attack_records": r.n_attack_records,
                "n_detected_original": r.n_detected_original,
                "n_detected_adversarial": r.n_detected_adversarial,
                "low_confidence": r.low_confidence,
            }
            out.setdefault(r.algorithm, {}).setdefault(r.attack, {})[r.setting] = cell
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv_text())

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_json_obj(), fh, indent=2, sort_keys=True)
            fh.write("\n")


@dataclass
class ExperimentConfig:
    train_path: str
    test_path: str
    master_seed: int = 42
    algorithms: tuple = detectors.ALGORITHMS
    attacks: tuple = ("dos", "u2r_r2l")
    settings: tuple = (FUNCTIONAL_ONLY, ABLATION)
    gan: gan.TrainConfig = field(default_factory=gan.TrainConfig)
    ids_hyperparams: dict = field(default_factory=dict)
    jobs: int = 1


@dataclass
class ExperimentResult:
    report: EvalReport
    traces: dict
    schema: FeatureSchema


@dataclass
class _GridInputs:
    """Everything a single cell needs, precomputed once per run."""

    schema: FeatureSchema
    fingerprint: str
    ids_X: np.ndarray
    ids_y: np.ndarray
    gan_normals: np.ndarray
    gan_attacks: dict
    test_attacks: dict


def _group_matrix(matrix, categories, wanted) -> np.ndarray:
    keep = [i for i, c in enumerate(categories) if c in wanted]
    return matrix[keep]


def prepare_grid_inputs(config: ExperimentConfig) -> _GridInputs:
    train_records = load_file(config.train_path)
    test_records = load_file(config.test_path)
    ids_half, gan_half = split_train(train_records, config.master_seed)

    # Ranges and vocabularies come from the detector training half only.
    schema = build_schema(ids_half)

    ids_X, ids_cats = encode_batch(ids_half, schema)
    ids_y = np.array(
        [
            detectors.LABEL_NORMAL if c == AttackCategory.NORMAL else detectors.LABEL_ATTACK
            for c in ids_cats
        ]
    )
    gan_X, gan_cats = encode_batch(gan_half, schema)
    test_X, test_cats = encode_batch(test_records, schema)

    normal = {AttackCategory.NORMAL}
    gan_attacks = {}
    test_attacks = {}
    for name in ATTACK_GROUPS:
        wanted = set(ATTACK_GROUPS[name])
        gan_attacks[name] = _group_matrix(gan_X, gan_cats, wanted)
        test_attacks[name] = _group_matrix(test_X, test_cats, wanted)

    return _GridInputs(
        schema=schema,
        fingerprint=schema.fingerprint(),
        ids_X=ids_X,
        ids_y=ids_y,
        gan_normals=_group_matrix(gan_X, gan_cats, normal),
        gan_attacks=gan_attacks,
        test_attacks=test_attacks,
    )


def run_cell(
    inputs: _GridInputs,
    config: ExperimentConfig,
    algorithm: str,
    attack: str,
    setting: str,
):
    """One grid cell: returns (EvalRow, per-epoch training history)."""
    cell = f"(algorithm={algorithm}, attack={attack}, setting={setting})"
    try:
        cell_seed = nn.derive_seed(config.master_seed, algorithm, attack, setting)
        mask = mask_for(ATTACK_GROUPS[attack][0], setting)

        ids_model = detectors.fit(
            algorithm,
            inputs.ids_X,
            inputs.ids_y,
            seed=nn.derive_seed(cell_seed, "ids"),
            schema_fingerprint=inputs.fingerprint,
            hyperparams=config.ids_hyperparams.get(algorithm),
        )

        test_X = inputs.test_attacks[attack]
        if len(test_X) == 0:
            raise EmptyEvaluationSet(f"no {attack} attack records in the test split")
        original_pred = detectors.predict(ids_model, test_X, inputs.fingerprint)
        n_detected_original = int((original_pred == detectors.LABEL_ATTACK).sum())
        original_dr = detection_rate(original_pred)

        gan_config = replace(config.gan, seed=nn.derive_seed(cell_seed, "gan"))
        generator = gan.build_generator(
            gan_config, nn.make_rng(nn.derive_seed(gan_config.seed, "gen-init"))
        )
        critic = gan.build_critic(
            gan_config, nn.make_rng(nn.derive_seed(gan_config.seed, "critic-init"))
        )
        data = gan.TrainData(normals=inputs.gan_normals, attacks=inputs.gan_attacks[attack])
        history = gan.train(
            generator, critic, ids_model, data, mask, inputs.schema, gan_config
        )

        eval_noise = nn.make_rng(nn.derive_seed(cell_seed, "eval-noise"))
        _, adversarial = gan.generate(generator, test_X, mask, inputs.schema, eval_noise)
        adv_pred = detectors.predict(ids_model, adversarial, inputs.fingerprint)
        n_detected_adv = int((adv_pred == detectors.LABEL_ATTACK).sum())
        adversarial_dr = detection_rate(adv_pred)

        eir = None if original_dr == 0.0 else evasion_increase_rate(original_dr, adversarial_dr)
        row = EvalRow(
            algorithm=algorithm,
            attack=attack,
            setting=setting,
            original_dr=original_dr,
            adversarial_dr=adversarial_dr,
            eir=eir,
            n_attack_records=len(test_X),
            n_detected_original=n_detected_original,
            n_detected_adversarial=n_detected_adv,
            low_confidence=original_dr < LOW_CONFIDENCE_DR,
        )
        return row, history
    except Exception as exc:
        raise ExperimentCellError(f"cell {cell}: {exc}") from exc


def _cell_worker(args):
    inputs, config, algorithm, attack, setting = args
    row, history = run_cell(inputs, config, algorithm, attack, setting)
    return (algorithm, attack, setting), row, history


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run the whole grid and assemble the report (rows in sorted cell order)."""
    inputs = prepare_grid_inputs(config)
    cells = [
        (inputs, config, algorithm, attack, setting)
        for algorithm in config.algorithms
        for attack in config.attacks
        for setting in config.settings
    ]
    if config.jobs > 1:
        import multiprocessing

        with multiprocessing.get_context("fork").Pool(config.jobs) as pool:
            results = pool.map(_cell_worker, cells)
    else:
        results = [_cell_worker(c) for c in cells]

    report = EvalReport()
    traces = {}
    for key, row, history in sorted(results, key=lambda r: r[0]):
        report.rows.append(row)
        traces[key] = history
    return ExperimentResult(report=report, traces=traces, schema=inputs.schema)
