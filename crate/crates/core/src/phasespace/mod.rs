//! Coincidence forms on admissible configurations and the experiments built
//! on them.

mod experiments;
mod forms;
mod geometry;
mod results;
mod weyl;

pub use experiments::{
    averaging_experiment, clustering_experiment, image_set, one_particle_functional, pi_norm_estimate, ppp_averaging,
    sharp_momentum_experiment, AveragingParams, ImageSet, PiNormEstimate, PppParams, SampleSpec, SharpParams,
};
pub use forms::{
    correlation_part, crucial_expansion, form_bruteforce, pi_prime, s_vanishing_check, CoincidenceForm, SVanishing,
};
pub use geometry::{diameter, epsilon_content, sample_admissible, AdmissibleConfig};
pub use results::{Quantity, ScanPoint, ScanResult, ValueKind};
pub use weyl::{Leaf, WeylPolynomial, WindowModel};
