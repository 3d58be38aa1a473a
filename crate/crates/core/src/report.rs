//! Residual bookkeeping: named checks with statistics, tolerances and
//! pass/fail flags.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Default tolerance of every named check.
pub const TOLERANCES: &[(&str, f64)] = &[
    ("catalog.tangency", 1e-10),
    ("chart.f_closed_form", 1e-3),
    ("chart.g_closed_form", 1e-3),
    ("chart.grad_s", 1e-3),
    ("chart.grad_t", 1e-3),
    ("chart.jacobian", 1e-3),
    ("chart.metric", 1e-3),
    ("chart.s_closed_form", 1e-3),
    ("chart.t_closed_form", 1e-3),
    ("chart.transport_f", 1e-3),
    ("chart.transport_g", 1e-3),
    ("flux.additivity", 1e-10),
    ("flux.dnperp", 1e-6),
    ("flux.n", 1e-6),
    ("funnel.growth", 1.0 + 1e-6),
    ("picard.rk_agreement", 1e-6),
    ("theorem_a.closed_form", 1e-4),
    ("theorem_a.curvature", 1e-4),
    ("theta.mixed_x", 1e-5),
    ("theta.mixed_y", 1e-5),
    ("theta.s", 1e-4),
    ("theta.t", 1e-4),
    ("tracer.reversibility", 1e-8),
    ("tracer.unit_speed", 1e-6),
    ("variational.el_residual", 1e-4),
    ("variational.rk_agreement", 1e-3),
];

/// The tolerance table with optional per-check overrides.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub overrides: BTreeMap<String, f64>,
}

impl Tolerances {
    pub fn get(&self, check: &str) -> f64 {
        if let Some(&t) = self.overrides.get(check) {
            return t;
        }
        TOLERANCES
            .iter()
            .find(|(name, _)| *name == check)
            .map(|&(_, t)| t)
            .unwrap_or_else(|| panic!("no tolerance declared for check '{check}'"))
    }

    pub fn set(&mut self, check: &str, tol: f64) {
        self.overrides.insert(check.to_string(), tol);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub check: String,
    /// The identity being checked, as formula text.
    pub anchor: String,
    pub n_samples: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub order: Option<f64>,
}

/// Stand-in for non-finite residuals, which JSON cannot carry.
pub const NON_FINITE_RESIDUAL: f64 = f64::MAX;

impl Entry {
    /// Statistics of `|r|` over `residuals`. An empty or non-finite set fails.
    pub fn from_residuals(check: &str, anchor: &str, residuals: &[f64], tolerance: f64) -> Entry {
        let n = residuals.len();
        let finite = residuals.iter().all(|r| r.is_finite());
        let (max, mean) = if n == 0 || !finite {
            (NON_FINITE_RESIDUAL, NON_FINITE_RESIDUAL)
        } else {
            let max = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
            let mean = residuals.iter().map(|r| r.abs()).sum::<f64>() / n as f64;
            (max, mean)
        };
        Entry {
            check: check.to_string(),
            anchor: anchor.to_string(),
            n_samples: n,
            max_residual: max,
            mean_residual: mean,
            tolerance,
            pass: n > 0 && finite && max <= tolerance,
            order: None,
        }
    }

    /// Attaches the fitted order of a refinement study with at least three
    /// levels; shorter studies leave the order unset.
    pub fn with_order(mut self, steps: &[f64], errors: &[f64]) -> Entry {
        self.order = convergence_order(steps, errors);
        self
    }
}

/// Least-squares slope of `log error` against `log step`; `None` with fewer
/// than three levels or any non-positive value.
pub fn convergence_order(steps: &[f64], errors: &[f64]) -> Option<f64> {
    if steps.len() != errors.len() || steps.len() < 3 {
        return None;
    }
    if steps.iter().chain(errors).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return None;
    }
    let xs: Vec<f64> = steps.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub entries: Vec<Entry>,
    pub metadata: BTreeMap<String, String>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, e: Entry) {
        self.entries.push(e);
    }

    pub fn set_meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.insert(key.to_string(), value.to_string());
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn entry(&self, check: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.check == check)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports hold finite numbers only")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(s, "# {k}: {v}");
        }
        for e in &self.entries {
            let order = e.order.map(|o| format!(" order {o:.3}")).unwrap_or_default();
            let _ = writeln!(
                s,
                "{} {:<28} max {:.3e} mean {:.3e} tol {:.1e} n {}{}  [{}]",
                if e.pass { "PASS" } else { "FAIL" },
                e.check,
                e.max_residual,
                e.mean_residual,
                e.tolerance,
                e.n_samples,
                order,
                e.anchor
            );
        }
        s
    }
}

fn entry_key(e: &Entry) -> (String, String, u64, u64, u64, u64, usize) {
    (
        e.check.clone(),
        e.anchor.clone(),
        e.max_residual.to_bits(),
        e.mean_residual.to_bits(),
        e.tolerance.to_bits(),
        e.order.map(f64::to_bits).unwrap_or(0),
        e.n_samples,
    )
}

/// Concatenates entries, sorted by check name (ties broken by the remaining
/// fields so the result does not depend on input order), and unions the
/// metadata. Conflicting metadata values are joined with `"; "` in sorted
/// order.
pub fn merge(reports: &[VerificationReport]) -> VerificationReport {
    let mut entries: Vec<Entry> = reports.iter().flat_map(|r| r.entries.clone()).collect();
    entries.sort_by_key(entry_key);
    let mut values: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for r in reports {
        for (k, v) in &r.metadata {
            let vs = values.entry(k.clone()).or_default();
            if !vs.contains(v) {
                vs.push(v.clone());
            }
        }
    }
    let metadata = values
        .into_iter()
        .map(|(k, mut vs)| {
            vs.sort();
            (k, vs.join("; "))
        })
        .collect();
    VerificationReport { entries, metadata }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_within_tolerance() {
        let e = Entry::from_residuals("x", "a = b", &[1e-9, -2e-9], 1e-9);
        assert!(!e.pass);
        assert_eq!(e.max_residual, 2e-9);
        let e = Entry::from_residuals("x", "a = b", &[1e-9, -2e-9], 2e-9);
        assert!(e.pass);
        assert!(!Entry::from_residuals("x", "", &[f64::NAN], 1.0).pass);
        assert!(!Entry::from_residuals("x", "", &[], 1.0).pass);
    }

    #[test]
    fn order_needs_three_levels() {
        assert_eq!(convergence_order(&[0.1, 0.05], &[1e-2, 2.5e-3]), None);
        let o = convergence_order(&[0.1, 0.05, 0.025], &[1e-2, 2.5e-3, 6.25e-4]).unwrap();
        assert!((o - 2.0).abs() < 1e-12);
    }

    #[test]
    fn every_check_has_a_tolerance() {
        let t = Tolerances::default();
        for (name, tol) in TOLERANCES {
            assert_eq!(t.get(name), *tol);
        }
    }
}
