//! Verification reports shared by the checkers and the command line.

use serde::Serialize;

use crate::padic::{PadicApprox, Valuation};

/// Digits a verified identity may lose against the requested precision.
pub const DEFAULT_GUARD: i64 = 2;

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub p: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(rename = "N")]
    pub n: i64,
    pub k_used: Option<u32>,
    pub achieved_valuation: Valuation,
    pub required_valuation: i64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<PadicApprox>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<PadicApprox>,
}

impl VerificationReport {
    pub fn new(check: &str, p: u64, n: i64, required: i64, achieved: Valuation) -> Self {
        let pass = achieved.at_least(required);
        VerificationReport {
            check: check.to_string(),
            p,
            r: None,
            f: None,
            q: None,
            n,
            k_used: None,
            achieved_valuation: achieved,
            required_valuation: required,
            pass,
            route: None,
            lhs: None,
            rhs: None,
        }
    }

    /// One-line text summary.
    pub fn line(&self) -> String {
        let mut s = format!("{} p={}", self.check, self.p);
        if let Some(r) = self.r {
            s += &format!(" r={r}");
        }
        if let Some(f) = self.f {
            s += &format!(" f={f}");
        }
        if let Some(q) = self.q {
            s += &format!(" q={q}");
        }
        if let Some(route) = &self.route {
            s += &format!(" route={route}");
        }
        s += &format!(
            " N={} valuation {} (need {}) {}",
            self.n,
            self.achieved_valuation,
            self.required_valuation,
            if self.pass { "PASS" } else { "FAIL" }
        );
        s
    }
}
