//! Private mechanisms over point tuples.
//!
//! Composite mechanisms return their output wrapped in [`Audited`], whose
//! ledger records how the declared budget was split. Callers can check
//! `ledger.audit_closed()` to confirm the pieces add up.

pub mod bounds;
mod hull;
mod identity;
mod nn;
mod svt;

pub use hull::{
    pch_anchors, pch_anchors_gp, private_convex_hull, private_convex_hull_gp, private_convex_hull_gp_with,
    private_convex_hull_with, AnchorCount, HullRelease, PchGpParams, PchOutcome, PchParams, DEFAULT_K_CLAMP,
};
pub use identity::{identity_cgp_inf, identity_cgp_l2, identity_gp_inf, identity_gp_l2};
pub use nn::{kpnn, kpnn_gp, pnn, PnnOutcome, PnnParams};
pub use svt::{svt, SvtOutcome};

use crate::accounting::BudgetLedger;

/// A mechanism output together with its budget ledger.
#[derive(Debug, Clone)]
pub struct Audited<T> {
    pub value: T,
    pub ledger: BudgetLedger,
}

impl<T> Audited<T> {
    pub fn into_value(self) -> T {
        self.value
    }
}
