"""End-to-end orchestration: data to filtered windows to features to
models to report files.

The flow follows the repetition-grouped protocol: filter the recording,
segment it, split by each of the three fixed cross-validation plans,
standardize with train-side statistics, extract features, train (bagged
by default), evaluate on the held-out repetitions, and average across
plans. Every stochastic component derives its seed from the single run
seed, so a rerun with the same config reproduces models and metric files
byte for byte; wall-clock timing is reported separately in summary.csv.
"""
from __future__ import annotations

import configparser
import json
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .dataset import (
    Recording,
    SyntheticSpec,
    Window,
    generate_synthetic,
    load_recording,
    make_cv_plans,
    segment,
    split_by_repetition,
)
from .dsp import (
    ChannelStats,
    compute_stats,
    design_bandpass,
    design_notch,
    filter_channels,
    standardize,
)
from .ensemble import (
    BaggedModel,
    load_bagged,
    predict_bagged,
    save_bagged,
    stratified_kfold,
    train_bagged,
)
from .features import FeatureConfig, extract_matrix
from .gbdt.booster import (
    BoostedModel,
    TrainParams,
    detect_hard_classes,
    predict_label,
    train,
)
from .gbdt.io import load_model, save_model
from .gbdt.objective import LossSpec
from .hpo import default_space, optimize
from .transfer import TransferConfig, TransferReport, transfer_report


class PipelineError(RuntimeError):
    """Stage-labeled failure; the message names the stage that died."""

    def __init__(self, stage: str, message: str) -> None:
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


@contextmanager
def _stage(name: str, timings: Dict[str, float]):
    start = time.perf_counter()
    try:
        yield
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, str(exc)) from exc
    finally:
        timings[name] = timings.get(name, 0.0) + time.perf_counter() - start


# ---------------------------------------------------------------- metrics


@dataclass(frozen=True)
class Metrics:
    """Confusion matrix and the scores derived from it."""

    confusion: np.ndarray
    accuracy: float
    per_class_precision: np.ndarray
    per_class_recall: np.ndarray
    per_class_f1: np.ndarray
    macro_precision: float
    macro_recall: float
    macro_f1: float

    @property
    def per_class_accuracy(self) -> np.ndarray:
        """Per-class accuracy is the per-class recall."""
        return self.per_class_recall


def evaluate(
    pred_labels: Sequence[int], true_labels: Sequence[int], n_classes: int
) -> Metrics:
    """Score encoded predictions against encoded truth.

    Labels must lie in 0..n_classes-1. confusion[i][j] counts samples with
    true class i predicted as j. Undefined ratios (0/0) score 0; macro
    scores are unweighted means over all n_classes classes.
    """
    pred = np.asarray(pred_labels)
    true = np.asarray(true_labels)
    if pred.ndim != 1 or true.ndim != 1 or pred.shape != true.shape:
        raise ValueError("prediction and truth must be 1-D and equal length")
    if pred.shape[0] < 1:
        raise ValueError("at least one sample is required")
    if n_classes < 1:
        raise ValueError("n_classes must be at least 1")
    for name, arr in (("pred", pred), ("true", true)):
        if arr.min() < 0 or arr.max() >= n_classes:
            raise ValueError(f"{name} labels must lie in 0..{n_classes - 1}")
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (true, pred), 1)
    diag = np.diag(confusion).astype(np.float64)
    rowsum = confusion.sum(axis=1).astype(np.float64)
    colsum = confusion.sum(axis=0).astype(np.float64)
    zeros = np.zeros(n_classes)
    precision = np.divide(diag, colsum, out=zeros.copy(), where=colsum > 0)
    recall = np.divide(diag, rowsum, out=zeros.copy(), where=rowsum > 0)
    pr = precision + recall
    f1 = np.divide(2.0 * precision * recall, pr, out=zeros.copy(), where=pr > 0)
    return Metrics(
        confusion=confusion,
        accuracy=float(diag.sum() / confusion.sum()),
        per_class_precision=precision,
        per_class_recall=recall,
        per_class_f1=f1,
        macro_precision=float(precision.mean()),
        macro_recall=float(recall.mean()),
        macro_f1=float(f1.mean()),
    )


# ----------------------------------------------------------- configuration


@dataclass
class PipelineConfig:
    """Everything a run needs; loadable from an INI file.

    The run seed overrides the synthetic-data seed and the training seed
    when the pipeline executes, so one value pins the whole run.
    """

    data_path: Optional[str] = None  # CSV path; None means synthetic data
    synthetic: SyntheticSpec = field(default_factory=SyntheticSpec)
    bandpass_low_hz: float = 20.0
    bandpass_high_hz: float = 200.0
    bandpass_order: int = 5
    notch_hz: Tuple[float, ...] = (74.0, 148.0)
    notch_quality: float = 30.0
    zero_phase: bool = False
    window_len: int = 1280
    step: int = 320
    include_rest: bool = False
    features: FeatureConfig = field(default_factory=FeatureConfig)
    # pipeline profile: gradient-based row sampling on, 63 bins, shorter
    # patience; keeps the full run inside an interactive time budget
    params: TrainParams = field(
        default_factory=lambda: TrainParams(
            max_rounds=60,
            top_rate=0.2,
            other_rate=0.1,
            max_bins=63,
            early_stop_rounds=15,
        )
    )
    loss_gain: float = 1.5
    hard_classes: Tuple[int, ...] = ()
    auto_hard_classes: bool = False
    use_ensemble: bool = True
    ensemble_k: int = 5
    hpo_trials: int = 30
    hpo_fast: bool = True
    transfer: TransferConfig = field(default_factory=TransferConfig)
    transfer_base_model: Optional[str] = None
    transfer_target_seed: Optional[int] = None
    transfer_seeds: Tuple[int, ...] = (0, 1, 2, 3, 4)
    out_dir: str = "out"
    model_dir: Optional[str] = None  # default: <out_dir>/model
    seed: int = 0

    def resolved_model_dir(self) -> str:
        return self.model_dir or os.path.join(self.out_dir, "model")


def default_config() -> PipelineConfig:
    """A complete synthetic-data configuration with package defaults."""
    return PipelineConfig()


def _parse_int_list(text: str) -> Tuple[int, ...]:
    return tuple(int(tok) for tok in text.replace(",", " ").split())


def _parse_float_list(text: str) -> Tuple[float, ...]:
    return tuple(float(tok) for tok in text.replace(",", " ").split())


def load_config(path: Union[str, os.PathLike]) -> PipelineConfig:
    """Read an INI config; unknown keys are errors, missing ones default.

    Sections and keys mirror PipelineConfig: [data], [filter], [window],
    [features], [train], [loss], [ensemble], [hpo], [transfer], [run].
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = cp.read(path)
    if not read:
        raise FileNotFoundError(f"config file not found: {path}")

    known = {
        "data": {
            "csv", "n_classes", "repetitions", "hold_duration",
            "rest_duration", "sample_rate", "snr_db", "mains_hz", "class_seed",
        },
        "filter": {"low_hz", "high_hz", "order", "notch_hz", "quality", "zero_phase"},
        "window": {"length", "step", "include_rest"},
        "features": {"stft_seg_len", "stft_hop"},
        "train": {
            "learning_rate", "num_leaves", "max_rounds", "min_data_in_leaf",
            "l2_regularization", "feature_fraction", "bagging_fraction",
            "top_rate", "other_rate", "max_bins", "early_stop_rounds",
        },
        "loss": {"gain", "hard_classes", "auto"},
        "ensemble": {"enabled", "k"},
        "hpo": {"n_trials", "fast"},
        "transfer": {
            "base_model", "target_seed", "learning_rate", "max_rounds",
            "early_stop_rounds", "seeds",
        },
        "run": {"out", "model_dir", "seed"},
    }
    for section in cp.sections():
        if section not in known:
            raise ValueError(f"unknown config section [{section}]")
        extra = set(cp[section]) - known[section]
        if extra:
            raise ValueError(
                f"unknown key(s) in [{section}]: {', '.join(sorted(extra))}"
            )

    def get(section: str, key: str, default: str) -> str:
        return cp.get(section, key, fallback=default).strip()

    base = PipelineConfig()
    synth = SyntheticSpec(
        n_classes=cp.getint("data", "n_classes", fallback=18),
        repetitions=cp.getint("data", "repetitions", fallback=6),
        hold_duration=cp.getfloat("data", "hold_duration", fallback=5.0),
        rest_duration=cp.getfloat("data", "rest_duration", fallback=3.0),
        sample_rate=cp.getfloat("data", "sample_rate", fallback=2000.0),
        snr_db=cp.getfloat("data", "snr_db", fallback=20.0),
        mains_hz=cp.getfloat("data", "mains_hz", fallback=74.0),
        class_seed=(
            int(get("data", "class_seed", "")) if get("data", "class_seed", "") else None
        ),
    )
    profile = PipelineConfig().params  # keep INI fallbacks equal to defaults
    params = TrainParams(
        learning_rate=cp.getfloat("train", "learning_rate", fallback=profile.learning_rate),
        num_leaves=cp.getint("train", "num_leaves", fallback=profile.num_leaves),
        max_rounds=cp.getint("train", "max_rounds", fallback=profile.max_rounds),
        min_data_in_leaf=cp.getint("train", "min_data_in_leaf", fallback=profile.min_data_in_leaf),
        l2_regularization=cp.getfloat("train", "l2_regularization", fallback=profile.l2_regularization),
        feature_fraction=cp.getfloat("train", "feature_fraction", fallback=profile.feature_fraction),
        bagging_fraction=cp.getfloat("train", "bagging_fraction", fallback=profile.bagging_fraction),
        top_rate=cp.getfloat("train", "top_rate", fallback=profile.top_rate),
        other_rate=cp.getfloat("train", "other_rate", fallback=profile.other_rate),
        max_bins=cp.getint("train", "max_bins", fallback=profile.max_bins),
        early_stop_rounds=cp.getint("train", "early_stop_rounds", fallback=profile.early_stop_rounds),
    )
    transfer_cfg = TransferConfig(
        learning_rate=cp.getfloat("transfer", "learning_rate", fallback=0.05),
        max_rounds=cp.getint("transfer", "max_rounds", fallback=50),
        early_stop_rounds=cp.getint("transfer", "early_stop_rounds", fallback=30),
    )
    return PipelineConfig(
        data_path=get("data", "csv", "") or None,
        synthetic=synth,
        bandpass_low_hz=cp.getfloat("filter", "low_hz", fallback=20.0),
        bandpass_high_hz=cp.getfloat("filter", "high_hz", fallback=200.0),
        bandpass_order=cp.getint("filter", "order", fallback=5),
        notch_hz=_parse_float_list(get("filter", "notch_hz", "74, 148")),
        notch_quality=cp.getfloat("filter", "quality", fallback=30.0),
        zero_phase=cp.getboolean("filter", "zero_phase", fallback=False),
        window_len=cp.getint("window", "length", fallback=1280),
        step=cp.getint("window", "step", fallback=320),
        include_rest=cp.getboolean("window", "include_rest", fallback=False),
        features=FeatureConfig(
            sample_rate=cp.getfloat("data", "sample_rate", fallback=2000.0),
            stft_seg_len=cp.getint("features", "stft_seg_len", fallback=256),
            stft_hop=cp.getint("features", "stft_hop", fallback=128),
        ),
        params=params,
        loss_gain=cp.getfloat("loss", "gain", fallback=1.5),
        hard_classes=_parse_int_list(get("loss", "hard_classes", "")),
        auto_hard_classes=cp.getboolean("loss", "auto", fallback=False),
        use_ensemble=cp.getboolean("ensemble", "enabled", fallback=True),
        ensemble_k=cp.getint("ensemble", "k", fallback=5),
        hpo_trials=cp.getint("hpo", "n_trials", fallback=30),
        hpo_fast=cp.getboolean("hpo", "fast", fallback=True),
        transfer=transfer_cfg,
        transfer_base_model=get("transfer", "base_model", "") or None,
        transfer_target_seed=(
            int(get("transfer", "target_seed", ""))
            if get("transfer", "target_seed", "")
            else None
        ),
        transfer_seeds=_parse_int_list(get("transfer", "seeds", "0 1 2 3 4")),
        out_dir=get("run", "out", base.out_dir),
        model_dir=get("run", "model_dir", "") or None,
        seed=cp.getint("run", "seed", fallback=0),
    )


# ------------------------------------------------------------- file output


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _fmt(x: float) -> str:
    return repr(float(x))


def emit_report(
    plan_metrics: Sequence[Metrics],
    class_ids: Sequence[int],
    out_dir: Union[str, os.PathLike],
    train_seconds: float = 0.0,
) -> Dict[str, str]:
    """Write metrics.csv, per_movement.csv, confusion.csv and summary.csv.

    metrics.csv holds the four macro scores per plan plus their mean;
    per_movement.csv holds pooled per-class accuracy, one row per class
    and a mean row; confusion.csv is the pooled confusion matrix; and
    summary.csv repeats the plan-mean scores with the training time (the
    only value that varies between reruns). Writes replace atomically.
    """
    if not plan_metrics:
        raise ValueError("at least one plan result is required")
    out_dir = str(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    class_ids = [int(c) for c in class_ids]

    lines = ["plan,accuracy,macro_precision,macro_recall,macro_f1"]
    for i, m in enumerate(plan_metrics, start=1):
        lines.append(
            f"{i},{_fmt(m.accuracy)},{_fmt(m.macro_precision)},"
            f"{_fmt(m.macro_recall)},{_fmt(m.macro_f1)}"
        )
    means = [
        float(np.mean([m.accuracy for m in plan_metrics])),
        float(np.mean([m.macro_precision for m in plan_metrics])),
        float(np.mean([m.macro_recall for m in plan_metrics])),
        float(np.mean([m.macro_f1 for m in plan_metrics])),
    ]
    lines.append("mean," + ",".join(_fmt(v) for v in means))
    metrics_path = os.path.join(out_dir, "metrics.csv")
    _atomic_write(metrics_path, "\n".join(lines) + "\n")

    pooled = np.zeros_like(plan_metrics[0].confusion)
    for m in plan_metrics:
        pooled = pooled + m.confusion
    diag = np.diag(pooled).astype(np.float64)
    rowsum = pooled.sum(axis=1).astype(np.float64)
    per_class = np.divide(
        diag, rowsum, out=np.zeros(len(class_ids)), where=rowsum > 0
    )
    lines = ["movement,accuracy"]
    for cls, acc in zip(class_ids, per_class):
        lines.append(f"{cls},{_fmt(acc)}")
    lines.append(f"mean,{_fmt(float(per_class.mean()))}")
    per_movement_path = os.path.join(out_dir, "per_movement.csv")
    _atomic_write(per_movement_path, "\n".join(lines) + "\n")

    header = "true," + ",".join(f"pred_{c}" for c in class_ids)
    lines = [header]
    for cls, row in zip(class_ids, pooled):
        lines.append(f"{cls}," + ",".join(str(int(v)) for v in row))
    confusion_path = os.path.join(out_dir, "confusion.csv")
    _atomic_write(confusion_path, "\n".join(lines) + "\n")

    summary_path = os.path.join(out_dir, "summary.csv")
    _atomic_write(
        summary_path,
        "accuracy,macro_precision,macro_recall,macro_f1,train_seconds\n"
        + ",".join(_fmt(v) for v in means)
        + f",{_fmt(train_seconds)}\n",
    )
    return {
        "metrics": metrics_path,
        "per_movement": per_movement_path,
        "confusion": confusion_path,
        "summary": summary_path,
    }


# ------------------------------------------------------------ shared steps


def _effective(config: PipelineConfig) -> Tuple[SyntheticSpec, TrainParams]:
    """Apply the run seed to the data and training components."""
    return (
        replace(config.synthetic, seed=config.seed),
        replace(config.params, seed=config.seed),
    )


def _prepare_windows(
    config: PipelineConfig, timings: Dict[str, float], spec: SyntheticSpec
) -> List[Window]:
    with _stage("load", timings):
        if config.data_path:
            recording = load_recording(
                config.data_path, sample_rate=config.synthetic.sample_rate
            )
        else:
            recording = generate_synthetic(spec)
    with _stage("filter", timings):
        recording = _filter_recording(config, recording)
    with _stage("segment", timings):
        windows = segment(
            recording,
            window_len=config.window_len,
            step=config.step,
            include_rest=config.include_rest,
        )
        if not windows:
            raise ValueError("segmentation produced no windows")
    return windows


def _filter_recording(config: PipelineConfig, recording: Recording) -> Recording:
    fs = recording.sample_rate
    chain = [
        design_bandpass(
            config.bandpass_low_hz,
            config.bandpass_high_hz,
            order=config.bandpass_order,
            sample_rate=fs,
        )
    ]
    for f0 in config.notch_hz:
        chain.append(design_notch(f0, quality=config.notch_quality, sample_rate=fs))
    channels = recording.channels
    for sos in chain:
        channels = filter_channels(sos, channels, zero_phase=config.zero_phase)
    return replace(recording, channels=channels)


def _standardized_features(
    windows: Sequence[Window],
    stats: ChannelStats,
    cfg: FeatureConfig,
) -> Tuple[np.ndarray, np.ndarray]:
    X, labels, _ = extract_matrix(
        (standardize(stats, w) for w in windows), cfg
    )
    return X, labels


def _loss_for_plan(
    config: PipelineConfig,
    params: TrainParams,
    X: np.ndarray,
    y: np.ndarray,
) -> LossSpec:
    if not config.auto_hard_classes:
        return LossSpec(gain=config.loss_gain, hard_classes=config.hard_classes)
    assignment = stratified_kfold(y, k=5, seed=params.seed)
    hold = assignment == 0
    detected = detect_hard_classes(
        X[~hold], y[~hold], X[hold], y[hold], params=params
    )
    return LossSpec(gain=config.loss_gain, hard_classes=detected)


def _save_stats(stats: ChannelStats, directory: str) -> None:
    doc = {"mean": stats.mean.tolist(), "std": stats.std.tolist()}
    _atomic_write(
        os.path.join(directory, "standardization.json"),
        json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n",
    )


def _load_stats(directory: str) -> ChannelStats:
    path = os.path.join(directory, "standardization.json")
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return ChannelStats(np.asarray(doc["mean"]), np.asarray(doc["std"]))


def _encode(class_ids: np.ndarray, labels: np.ndarray) -> np.ndarray:
    enc = np.searchsorted(class_ids, labels)
    bad = (enc >= class_ids.shape[0]) | (
        class_ids[np.minimum(enc, class_ids.shape[0] - 1)] != labels
    )
    if bad.any():
        raise ValueError(
            f"labels outside the class set: {np.unique(labels[bad]).tolist()}"
        )
    return enc


# -------------------------------------------------------------- run modes


def _run_train(config: PipelineConfig, timings: Dict[str, float]) -> Dict:
    spec, params = _effective(config)
    windows = _prepare_windows(config, timings, spec)
    class_ids = np.unique([w.label for w in windows])
    plans = make_cv_plans()
    plan_metrics: List[Metrics] = []
    model_root = config.resolved_model_dir()

    for i, plan in enumerate(plans, start=1):
        with _stage("standardize", timings):
            train_w, test_w = split_by_repetition(windows, plan)
            if not train_w or not test_w:
                raise ValueError(f"plan {i} leaves an empty train or test side")
            stats = compute_stats(train_w)
        with _stage("features", timings):
            X_train, y_train = _standardized_features(train_w, stats, config.features)
            X_test, y_test = _standardized_features(test_w, stats, config.features)
        with _stage("train", timings):
            loss = _loss_for_plan(config, params, X_train, y_train)
            if config.use_ensemble:
                model: Union[BaggedModel, BoostedModel] = train_bagged(
                    X_train, y_train, params=params, loss=loss, k=config.ensemble_k
                )
                pred = predict_bagged(model, X_test)[0]
            else:
                assignment = stratified_kfold(y_train, k=5, seed=params.seed)
                hold = assignment == 0
                model = train(
                    X_train[~hold], y_train[~hold], X_train[hold], y_train[hold],
                    params=params, loss=loss,
                )
                pred = predict_label(model, X_test)
        with _stage("save", timings):
            plan_dir = os.path.join(model_root, f"plan_{i}")
            os.makedirs(plan_dir, exist_ok=True)
            if isinstance(model, BaggedModel):
                save_bagged(model, plan_dir)
            else:
                save_model(model, os.path.join(plan_dir, "model.json"))
            _save_stats(stats, plan_dir)
        with _stage("evaluate", timings):
            plan_metrics.append(
                evaluate(
                    _encode(class_ids, pred),
                    _encode(class_ids, y_test),
                    len(class_ids),
                )
            )

    with _stage("report", timings):
        paths = emit_report(
            plan_metrics, class_ids, config.out_dir, timings.get("train", 0.0)
        )
    return {
        "mode": "train",
        "mean_accuracy": float(np.mean([m.accuracy for m in plan_metrics])),
        "plan_accuracies": [m.accuracy for m in plan_metrics],
        "files": paths,
        "model_dir": model_root,
    }


def _load_plan_model(plan_dir: str) -> Union[BaggedModel, BoostedModel]:
    if os.path.exists(os.path.join(plan_dir, "manifest.json")):
        return load_bagged(plan_dir)
    return load_model(os.path.join(plan_dir, "model.json"))


def _run_evaluate(config: PipelineConfig, timings: Dict[str, float]) -> Dict:
    spec, _ = _effective(config)
    model_root = config.resolved_model_dir()
    if not os.path.isdir(model_root):
        raise PipelineError("load", f"model directory not found: {model_root}")
    windows = _prepare_windows(config, timings, spec)
    class_ids = np.unique([w.label for w in windows])
    plans = make_cv_plans()
    plan_metrics: List[Metrics] = []

    for i, plan in enumerate(plans, start=1):
        plan_dir = os.path.join(model_root, f"plan_{i}")
        with _stage("load_model", timings):
            if not os.path.isdir(plan_dir):
                raise ValueError(f"missing saved plan directory: {plan_dir}")
            model = _load_plan_model(plan_dir)
            stats = _load_stats(plan_dir)
        with _stage("features", timings):
            _, test_w = split_by_repetition(windows, plan)
            if not test_w:
                raise ValueError(f"plan {i} has no test windows")
            X_test, y_test = _standardized_features(test_w, stats, config.features)
        with _stage("evaluate", timings):
            if isinstance(model, BaggedModel):
                pred = predict_bagged(model, X_test)[0]
            else:
                pred = predict_label(model, X_test)
            plan_metrics.append(
                evaluate(
                    _encode(class_ids, pred),
                    _encode(class_ids, y_test),
                    len(class_ids),
                )
            )

    with _stage("report", timings):
        paths = emit_report(plan_metrics, class_ids, config.out_dir, 0.0)
    return {
        "mode": "evaluate",
        "mean_accuracy": float(np.mean([m.accuracy for m in plan_metrics])),
        "plan_accuracies": [m.accuracy for m in plan_metrics],
        "files": paths,
    }


def _run_tune(config: PipelineConfig, timings: Dict[str, float]) -> Dict:
    spec, params = _effective(config)
    windows = _prepare_windows(config, timings, spec)
    plans = make_cv_plans()
    if config.hpo_fast:
        plans = plans[:1]

    with _stage("features", timings):
        plan_data = []
        for plan in plans:
            train_w, test_w = split_by_repetition(windows, plan)
            stats = compute_stats(train_w)
            plan_data.append(
                _standardized_features(train_w, stats, config.features)
                + _standardized_features(test_w, stats, config.features)
            )

    base_loss = LossSpec(gain=config.loss_gain, hard_classes=config.hard_classes)

    def objective(point: Dict) -> float:
        trial_params = replace(
            params,
            learning_rate=float(point["learning_rate"]),
            num_leaves=int(point["num_leaves"]),
            min_data_in_leaf=int(point["min_data_in_leaf"]),
            feature_fraction=float(point["feature_fraction"]),
            bagging_fraction=float(point["bagging_fraction"]),
            l2_regularization=float(point["l2_regularization"]),
        )
        accs = []
        for X_train, y_train, X_test, y_test in plan_data:
            assignment = stratified_kfold(y_train, k=5, seed=trial_params.seed)
            hold = assignment == 0
            model = train(
                X_train[~hold], y_train[~hold], X_train[hold], y_train[hold],
                params=trial_params, loss=base_loss,
            )
            accs.append(float(np.mean(predict_label(model, X_test) == y_test)))
        return float(np.mean(accs))

    os.makedirs(config.out_dir, exist_ok=True)
    log_path = os.path.join(config.out_dir, "trials.log")
    with _stage("tune", timings):
        study = optimize(
            default_space(),
            config.hpo_trials,
            objective,
            seed=config.seed,
            log_path=log_path,
        )
    best = {"value": study.best_value, "params": study.best_params}
    _atomic_write(
        os.path.join(config.out_dir, "best_params.json"),
        json.dumps(best, sort_keys=True, separators=(",", ":")) + "\n",
    )
    return {
        "mode": "tune",
        "best_value": study.best_value,
        "best_params": study.best_params,
        "n_trials": len(study.trials),
        "files": {"trials": log_path},
    }


def _resolve_base_model(path: str) -> Tuple[BoostedModel, ChannelStats]:
    if os.path.isdir(path):
        model_file = os.path.join(path, "model.json")
        if not os.path.exists(model_file):
            raise ValueError(
                "transfer needs a single boosted model: expected model.json "
                f"inside {path} (bagged ensembles are not valid bases)"
            )
        stats_dir = path
    else:
        model_file = path
        stats_dir = os.path.dirname(path) or "."
    model = load_model(model_file)
    if not os.path.exists(os.path.join(stats_dir, "standardization.json")):
        raise ValueError(
            f"no standardization.json beside the base model in {stats_dir}"
        )
    return model, _load_stats(stats_dir)


def _run_transfer(config: PipelineConfig, timings: Dict[str, float]) -> Dict:
    if not config.transfer_base_model:
        raise PipelineError(
            "transfer", "config [transfer] base_model is required in this mode"
        )
    with _stage("load_model", timings):
        base, stats = _resolve_base_model(config.transfer_base_model)

    spec, _ = _effective(config)
    if not config.data_path:
        # same gesture profiles as the base run, new recording conditions
        target_seed = (
            config.transfer_target_seed
            if config.transfer_target_seed is not None
            else config.seed + 1
        )
        profile = (
            config.synthetic.class_seed
            if config.synthetic.class_seed is not None
            else config.seed
        )
        spec = replace(spec, seed=target_seed, class_seed=profile)
    windows = _prepare_windows(config, timings, spec)

    with _stage("features", timings):
        X, y = _standardized_features(windows, stats, config.features)

    with _stage("transfer", timings):
        report = transfer_report(
            X, y, base,
            cfg=config.transfer,
            seeds=config.transfer_seeds,
            loss=LossSpec(gain=config.loss_gain, hard_classes=config.hard_classes),
        )
    with _stage("report", timings):
        path = write_transfer_csv(report, config.out_dir)
    before_mean, after_mean = report.mean_row()
    return {
        "mode": "transfer",
        "before_mean": before_mean,
        "after_mean": after_mean,
        "files": {"transfer_report": path},
    }


def write_transfer_csv(
    report: TransferReport, out_dir: Union[str, os.PathLike]
) -> str:
    """Per-class before/after table plus a mean row."""
    out_dir = str(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    lines = ["movement,before_accuracy,after_accuracy"]
    for cls, before, after in report.per_class_rows():
        lines.append(f"{cls},{_fmt(before)},{_fmt(after)}")
    before_mean, after_mean = report.mean_row()
    lines.append(f"mean,{_fmt(before_mean)},{_fmt(after_mean)}")
    path = os.path.join(out_dir, "transfer_report.csv")
    _atomic_write(path, "\n".join(lines) + "\n")
    return path


MODES = ("train", "evaluate", "tune", "transfer")


def run_pipeline(config: PipelineConfig, mode: str = "train") -> Dict:
    """Execute one pipeline mode; returns a summary dict.

    Artifacts land under config.out_dir (and the model directory for
    train mode). Failures raise PipelineError naming the stage.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    timings: Dict[str, float] = {}
    runner = {
        "train": _run_train,
        "evaluate": _run_evaluate,
        "tune": _run_tune,
        "transfer": _run_transfer,
    }[mode]
    result = runner(config, timings)
    result["timings"] = {k: round(v, 3) for k, v in timings.items()}
    return result
