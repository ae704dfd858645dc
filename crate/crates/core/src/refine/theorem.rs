use crate::geometry::polyunion_subset;
use crate::lyapunov::{certified_level_outside, sublevel_contains, ExtendedSublevel};
use crate::scalar::TOL_GEO;

use super::driver::uncertain_hull;
use super::record::{IterationState, RunRecord, Verdict};
use super::RefineError;

/// Outcome of re-checking the chain of inclusions of a record.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoremCheck {
    pub passed: bool,
    pub violations: Vec<String>,
}

impl TheoremCheck {
    pub fn first_violation(&self) -> Option<&str> {
        self.violations.first().map(String::as_str)
    }
}

fn solved(s: &IterationState) -> Result<(&crate::lyapunov::PwaFunction<f64>, f64, &crate::geometry::Polyunion<f64>), RefineError> {
    let missing = |what: &str| RefineError::Record(format!("state {} has no {what}", s.k));
    Ok((
        s.v.as_ref().ok_or_else(|| missing("V_k"))?,
        s.alpha_k.ok_or_else(|| missing("alpha_k"))?,
        s.c.as_ref().ok_or_else(|| missing("C_k"))?,
    ))
}

/// Re-verifies, from the stored data only, that for every accepted
/// iteration `k`
///
/// * `C_{k−1} ⊂ L^{V_k}_{α_k} ⊂ X_k ⊂ L^{V_{k−1}}_{α_{k−1}}`,
///
/// that `C_k` covers every point where the decrease bound of `V_k` may fail,
/// and that the last iteration `K` ends with `C_K = A_K` or `C_K ⊂ A_0`.
/// Sublevel sets use the extended membership of [`ExtendedSublevel`].
pub fn check_theorem(record: &RunRecord) -> Result<TheoremCheck, RefineError> {
    let chain: Vec<&IterationState> = record
        .certified_level_sets
        .iter()
        .map(|l| {
            record
                .states
                .iter()
                .find(|s| s.k == l.k && s.is_solved())
                .ok_or_else(|| RefineError::Record(format!("level set {} refers to a missing state", l.k)))
        })
        .collect::<Result<_, _>>()?;
    if chain.is_empty() {
        return Err(RefineError::Record("record has no solved state".into()));
    }
    let mut violations = Vec::new();
    let tol = TOL_GEO;
    for (idx, s) in chain.iter().enumerate() {
        let k = s.k;
        let (v, alpha, c) = solved(s)?;
        if let Some(l) = record.certified_level_sets.get(idx) {
            if (l.alpha - alpha).abs() > 0.0 {
                violations.push(format!("α_{k} differs between the state and the level-set list"));
            }
        }
        if !polyunion_subset(&s.a, c, tol) || !polyunion_subset(c, &s.x, tol) {
            violations.push(format!("A_{k} ⊄ C_{k} ⊄ X_{k}"));
        }
        if let Some(slacks) = &s.slacks {
            let hull = uncertain_hull(slacks, v.tess(), &s.a)?;
            if !polyunion_subset(&hull, c, tol) {
                violations.push(format!("C_{k} misses points where V_{k} may not decrease"));
            }
        }
        let mesh_inside = v.tess().vertices().iter().all(|p| s.x.contains(p, tol));
        let level_ok = match certified_level_outside(v, &s.x, &s.a, c)? {
            Some(limit) => alpha <= limit && alpha.is_finite(),
            None => false,
        };
        if !mesh_inside || !level_ok {
            violations.push(format!("L^{{V_{k}}}_{{α_{k}}} ⊄ X_{k}"));
        }
        if idx > 0 {
            let p = chain[idx - 1];
            let (pv, palpha, pc) = solved(p)?;
            if !sublevel_contains(v, alpha, pc, &s.a, c)? {
                violations.push(format!("C_{} ⊄ L^{{V_{k}}}_{{α_{k}}}", p.k));
            }
            if !ExtendedSublevel::new(pv, palpha, &p.a, pc).contains_set(&s.x) {
                violations.push(format!("X_{k} ⊄ L^{{V_{}}}_{{α_{}}}", p.k, p.k));
            }
        }
    }
    let last = chain[chain.len() - 1];
    let (_, _, c_last) = solved(last)?;
    let a0 = &record.states[0].a;
    let closes = polyunion_subset(c_last, &last.a, tol) || polyunion_subset(c_last, a0, tol);
    if record.verdict == Verdict::Certified && !closes {
        violations.push(format!("C_{} ⊄ A_0", last.k));
    }
    if record.verdict != Verdict::Certified {
        violations.push(format!("run ended with verdict {}", record.verdict));
    }
    Ok(TheoremCheck {
        passed: violations.is_empty(),
        violations,
    })
}
