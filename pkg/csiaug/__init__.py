#!/usr/bin/python

from csiaug.errors import (
    CsiAugError, ParseError, StructuralError, FormatError, SchemaError,
    BoundsError, ParameterError, SplitError, SamplerError, RunFailed, FetchError,
)
from csiaug.csi import (
    ColumnMapping, CsiRecord, SubcarrierSelection, parse_csi_line, format_csi_line,
    amplitudes, read_csi_log,
)
from csiaug.spectro import AmplitudeSeries, Spectrogram, series_from_records, trim, segment
from csiaug.rng import RandomStream, derive_seed
from csiaug.augment import (
    AugmentationSpec, PipelineSpec, DrawLog, apply_pipeline, replay,
    circular_rotate, resized_crop, amplitude_scale, contrast_scale,
    random_circular_rotation, random_resized_crop, random_amplitude, random_contrast,
)
from csiaug.specfile import read_spectrogram, write_spectrogram, write_preview
from csiaug.dataset import (
    Sample, SubsetManifest, SplitSpec, load_manifest, save_manifest, verify_manifest,
    load_samples, split, BalancedSampler, balanced_batches,
)
from csiaug.model import ClassifierConfig, CompactCNN
from csiaug.harness import (
    ExperimentSpec, RunSummary, train_one, evaluate, run_ablation,
    single_arms, combined_arm, beneficial_arm,
)
from csiaug.report import format_report, parse_csv_report
from csiaug.fetch import FetchSession
