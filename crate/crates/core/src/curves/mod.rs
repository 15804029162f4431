//! The isogeny class of a twisted Frey curve and its local and global
//! invariants.

mod class;
mod period;
mod tate;
mod torsion;
mod weierstrass;

pub use class::{
    build_class, build_class_with, class_hash, class_models, ClassError, CurveFactors,
    IsogenyClass, PrimeData,
};
pub use period::real_period;
pub use tate::{reduction_data, reduction_data_u64, Kodaira, LocalData, Reduction};
pub use torsion::torsion_order;
pub use weierstrass::WeierstrassCurve;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CurveError {
    #[error("singular model (zero discriminant)")]
    Singular,
}
