//! Work budget for exhaustive sweeps.
//!
//! Enumeration-heavy operations (shift-balance fractions, Furstenberg
//! audits, EVAL-matrix construction over all of V) charge one unit per
//! elementary incidence check. When the budget runs out they fail fast
//! instead of hanging on an oversized instance.

/// Default cap: 10^8 incidence checks.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetExceeded {
    pub requested: u64,
    pub remaining: u64,
}

impl std::fmt::Display for BudgetExceeded {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "enumeration budget exceeded: needed {} more checks, {} remaining",
            self.requested, self.remaining
        )
    }
}

impl std::error::Error for BudgetExceeded {}

/// Countdown of remaining incidence checks.
#[derive(Debug, Clone)]
pub struct Budget {
    remaining: u64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Self { remaining: limit }
    }

    pub fn default_budget() -> Self {
        Self::new(DEFAULT_BUDGET)
    }

    pub fn remaining(&self) -> u64 {
        self.remaining
    }

    /// Consume `amount` units, failing if fewer remain.
    pub fn charge(&mut self, amount: u64) -> Result<(), BudgetExceeded> {
        if amount > self.remaining {
            return Err(BudgetExceeded {
                requested: amount,
                remaining: self.remaining,
            });
        }
        self.remaining -= amount;
        Ok(())
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self::default_budget()
    }
}
