//! Block-Markov coding simulation.

mod codebook;
mod config;
mod estimate;
mod keys;
mod scheme;
mod typical;

pub use codebook::{pack_index, unpack_index, Codebooks, KeyCodebook};
pub use config::{
    book_size, BookSizes, LeakageConfig, LeakageMode, MessageRates, RateVector, SimConfig, SimPlan,
    DEFAULT_SYMBOL_BUDGET,
};
pub use estimate::{
    estimate_error, estimate_leakage, one_time_pad_leakage, paired_sign_test, run_trials, summarize, FailureCounts,
    KeyBookReport, LeakageReport, PairedComparison, SimReport,
};
pub use keys::{
    build_key_mapping, decrypt, encrypt, equalize_partition, mapping_report, split_key, KeyMappingReport,
    PartitionReport,
};
pub use scheme::{
    backward_decode, channel_transmit, draw_messages, draw_states, encode_block, run_trial, select_codewords, transmit,
    wyner_ziv_encode, BlockChoice, BlockMessages, BlockTranscript, DecodeOutcome, FailureCause, SchemeTests,
    TrialOutcome, TrialSeeds,
};
pub use typical::{typical_set_test, TypicalityTest};
