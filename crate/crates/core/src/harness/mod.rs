//! Datasets, synthetic videos, baselines, evaluation and end-to-end runs.

mod baselines;
mod dataset;
mod eval;
mod experiment;
mod synth;

pub use baselines::{
    baseline_kmeans_keyframes, baseline_uniform_keyframes, fit_window_centers, keyframes_from_centers,
    kmeans, window_embeddings, KMeans,
};
pub use dataset::{
    ingest, read_pgm, read_vidf, read_vidf_file, write_pgm, write_vidf, write_vidf_file, Dataset,
    LabeledVideo, Split,
};
pub use eval::{evaluate, EvalReport};
pub use experiment::{
    ablation_inter_only, ablation_shared_dictionary, bank_training_sets, class_training_frames, decompose_dataset, decompose_splits, predict,
    run_ablation_grid, run_experiment, run_variants, train_bank, training_descriptors, video_seed,
    Decomposed, Describer, DescriptorVariant, ExperimentConfig, KMeansConfig, KeyframeMethod,
    RunResult, SharedDictionary,
};
pub use synth::{synth_gen, Archetype, SynthConfig};
