//! Lower bounds on the equivocation `H(X|Y)` of a channel from the confusion
//! matrix of its MAP decoder, the channels that attain them, and the
//! mutual-information sandwich they give for sampled data.
//!
//! ```
//! use equivbound::{bound_report, validate_confusion};
//!
//! let cm = validate_confusion(&[vec![0.4, 0.1], vec![0.0, 0.5]]).unwrap();
//! let r = bound_report(&cm);
//! assert!(r.bound_kovalevsky <= r.bound_confusion + 1e-12);
//! assert!(r.bound_confusion <= r.h_x_given_xhat + 1e-12);
//! ```

pub mod bounds;
pub mod channel;
pub mod confusion;
pub mod entropy;
pub mod error;
pub mod estimation;
pub mod joint;
pub mod numfmt;
pub mod oracle;

pub use bounds::{
    admissible_lengths, alpha_coeff, bound_report, entropies, equivocation_bound, kovalevsky_bound, phi_star,
    BoundReport, Entropies, LengthProfile,
};
pub use channel::{
    build_achieving_channel, flatten_column, AchievingChannel, ChannelDump, Fiber, FiberDump, FiberShape, FlatColumn,
    GeneralColumn, Rebalance,
};
pub use confusion::{
    decode_profile, read_confusion_csv, validate_confusion, write_confusion_csv, ConfusionMatrix, DecodeProfile,
};
pub use entropy::{entropy_bits, entropy_of_masses};
pub use error::{Error, Result, Violation};
pub use estimation::{
    empirical_confusion, empirical_decoder, estimate, ingest_samples, EstimationReport, SampleBatch, SampleFormat,
};
pub use joint::JointChannel;
pub use numfmt::{format_sig, round_sig};
