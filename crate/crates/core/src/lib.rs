//! Contact surgery calculus on the right-handed trefoil.
//!
//! * [`rationals`]: exact coefficients, negative continued fractions, slope maps.
//! * [`contact_diagram`]: Legendrian surgery diagrams and their normalization to `±1` surgeries.
//! * [`smooth_topology`]: linking matrices, Smith normal form, first homology.
//! * [`floer_engine`]: Heegaard Floer rank facts and exact-triangle propagation.
//! * [`contact_certifier`]: tightness certificates and their verifier.
//! * [`formats`]: JSON file formats.

pub mod contact_certifier;
pub mod contact_diagram;
pub mod floer_engine;
pub mod formats;
pub mod rationals;
pub mod smooth_topology;

pub use contact_certifier::{certify_tight, check_certificate, verify_certificate, Certificate};
pub use contact_diagram::{generate_vk, generate_yr_diagram, ContactDiagram};
pub use rationals::SurgeryCoefficient;
