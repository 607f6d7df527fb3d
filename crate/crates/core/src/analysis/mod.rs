//! Rank comparison, self-citation attenuation and half-sampling.

pub mod halfsample;
pub mod kappa;
pub mod rank;

pub use halfsample::{half_sample, half_sampling_study, HalfSampleConfig, HalfSampleStudy, MethodSummary, SamplingMode};
pub use kappa::{apply_kappa, attenuated_ratio, kappa, self_citation_profile, SelfCitationEntry, SelfCitationProfile};
pub use rank::{average_ranks, kendall_tau, spearman, RankComparison};
