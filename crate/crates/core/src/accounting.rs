//! Privacy budgets, GP ↔ CGP conversions, composition, and an audit ledger.
//!
//! Budgets are plain values. A [`BudgetLedger`] records how a composite
//! mechanism splits its declared budget; it does not enforce anything at run
//! time beyond the audit methods.

use std::fmt;

use crate::error::{ensure_nonnegative, ensure_positive, ensure_probability, invalid, Error, Result};

/// Relative tolerance used by ledger audits.
pub const LEDGER_TOLERANCE: f64 = 1e-12;

/// An (ε, δ)-GP budget; ε is a rate per unit distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpBudget {
    pub eps: f64,
    pub delta: f64,
}

impl GpBudget {
    pub fn new(eps: f64, delta: f64) -> Result<Self> {
        ensure_nonnegative("eps", eps)?;
        if !(0.0..1.0).contains(&delta) {
            return Err(invalid(format!("delta must lie in [0, 1), got {delta}")));
        }
        Ok(Self { eps, delta })
    }

    pub fn pure(eps: f64) -> Result<Self> {
        Self::new(eps, 0.0)
    }
}

/// A ρ-CGP budget; ρ is a rate per unit distance squared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgpBudget {
    pub rho: f64,
}

impl CgpBudget {
    pub fn new(rho: f64) -> Result<Self> {
        ensure_nonnegative("rho", rho)?;
        Ok(Self { rho })
    }
}

/// An (ε, δ, Δ)-GP budget: the GP guarantee restricted to input pairs at
/// distance at most Δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxedGpBudget {
    pub eps: f64,
    pub delta: f64,
    pub max_distance: f64,
}

/// Any pure ε-GP mechanism is ε²/2-CGP.
pub fn gp_to_cgp(eps: f64) -> Result<CgpBudget> {
    ensure_nonnegative("eps", eps)?;
    Ok(CgpBudget { rho: eps * eps / 2.0 })
}

/// The GP rate whose CGP image is `rho`, i.e. `√(2ρ)`.
pub fn cgp_to_gp_rate(rho: f64) -> Result<f64> {
    ensure_nonnegative("rho", rho)?;
    Ok((2.0 * rho).sqrt())
}

/// A ρ-CGP mechanism is (ε, δ, Δ)-GP with `ε = ρΔ + 2√(ρ log 1/δ)`.
pub fn cgp_to_relaxed_gp(rho: f64, delta: f64, max_distance: f64) -> Result<RelaxedGpBudget> {
    ensure_nonnegative("rho", rho)?;
    ensure_probability("delta", delta)?;
    ensure_positive("max_distance", max_distance)?;
    let eps = rho * max_distance + 2.0 * (rho * (1.0 / delta).ln()).sqrt();
    Ok(RelaxedGpBudget {
        eps,
        delta,
        max_distance,
    })
}

/// The GP rate matched to a CGP rate `rho` for side-by-side comparisons.
///
/// Solves `ε = ρ Δ + 2√(ρ log 1/δ)` under the constraint `ε Δ = min_eps_delta`,
/// giving `ε = √(ρ·min_eps_delta + ρ log 1/δ) + √(ρ log 1/δ)`.
pub fn matched_gp_budget(rho: f64, delta: f64, min_eps_delta: f64) -> Result<f64> {
    ensure_positive("rho", rho)?;
    ensure_probability("delta", delta)?;
    ensure_positive("min_eps_delta", min_eps_delta)?;
    let log_term = rho * (1.0 / delta).ln();
    Ok((rho * min_eps_delta + log_term).sqrt() + log_term.sqrt())
}

/// Adaptive CGP composition: rates add.
pub fn compose_cgp(budgets: &[CgpBudget]) -> Result<CgpBudget> {
    if budgets.is_empty() {
        return Err(invalid("cannot compose an empty list of budgets"));
    }
    Ok(CgpBudget {
        rho: budgets.iter().map(|b| b.rho).sum(),
    })
}

/// Result of basic GP composition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpComposition {
    /// Component-wise sum. `delta` may reach or exceed one, in which case the
    /// composed guarantee is vacuous.
    pub budget: GpBudget,
    pub delta_exceeds_one: bool,
}

/// Basic GP composition: ε and δ add.
pub fn compose_gp(budgets: &[GpBudget]) -> Result<GpComposition> {
    if budgets.is_empty() {
        return Err(invalid("cannot compose an empty list of budgets"));
    }
    let eps = budgets.iter().map(|b| b.eps).sum();
    let delta: f64 = budgets.iter().map(|b| b.delta).sum();
    Ok(GpComposition {
        budget: GpBudget { eps, delta },
        delta_exceeds_one: delta >= 1.0,
    })
}

/// The budget a ledger was opened with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeclaredBudget {
    /// Pure GP; entries are ε amounts under basic composition.
    Gp(GpBudget),
    /// CGP; entries are ρ amounts.
    Cgp(CgpBudget),
}

impl DeclaredBudget {
    /// The scalar ledger entries are compared against (ε or ρ).
    pub fn amount(&self) -> f64 {
        match self {
            DeclaredBudget::Gp(b) => b.eps,
            DeclaredBudget::Cgp(b) => b.rho,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerEntry {
    pub label: String,
    pub amount: f64,
}

/// Audit trail of how a composite mechanism spends its budget.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetLedger {
    declared: DeclaredBudget,
    entries: Vec<LedgerEntry>,
}

impl BudgetLedger {
    pub fn new(declared: DeclaredBudget) -> Self {
        Self {
            declared,
            entries: Vec::new(),
        }
    }

    pub fn gp(eps: f64) -> Self {
        Self::new(DeclaredBudget::Gp(GpBudget { eps, delta: 0.0 }))
    }

    pub fn cgp(rho: f64) -> Self {
        Self::new(DeclaredBudget::Cgp(CgpBudget { rho }))
    }

    pub fn declared(&self) -> DeclaredBudget {
        self.declared
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn charge(&mut self, label: impl Into<String>, amount: f64) {
        self.entries.push(LedgerEntry {
            label: label.into(),
            amount,
        });
    }

    pub fn consumed(&self) -> f64 {
        self.entries.iter().map(|e| e.amount).sum()
    }

    pub fn remaining(&self) -> f64 {
        self.declared.amount() - self.consumed()
    }

    /// Consumption does not exceed the declared budget.
    pub fn audit_within(&self) -> Result<()> {
        let declared = self.declared.amount();
        let consumed = self.consumed();
        if consumed <= declared * (1.0 + LEDGER_TOLERANCE) {
            Ok(())
        } else {
            Err(Error::BudgetMismatch { declared, consumed })
        }
    }

    /// Consumption equals the declared budget.
    pub fn audit_closed(&self) -> Result<()> {
        let declared = self.declared.amount();
        let consumed = self.consumed();
        if (consumed - declared).abs() <= LEDGER_TOLERANCE * declared.abs() {
            Ok(())
        } else {
            Err(Error::BudgetMismatch { declared, consumed })
        }
    }
}

impl fmt::Display for BudgetLedger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.declared {
            DeclaredBudget::Gp(b) => writeln!(f, "GP ledger, eps = {}", b.eps)?,
            DeclaredBudget::Cgp(b) => writeln!(f, "CGP ledger, rho = {}", b.rho)?,
        }
        for e in &self.entries {
            writeln!(f, "  {:<24} {}", e.label, e.amount)?;
        }
        write!(f, "  consumed {}", self.consumed())
    }
}
