//! Sampled checks of the Galois-connection laws and of compatibility
//! `α∘ℓ = 𝕓∘α`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::instance::Instance;
use crate::lattice::LatticeValue;
use crate::witness::{Payload, WitnessError};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LawReport {
    pub checked: usize,
    pub violations: Vec<String>,
    pub skipped: Vec<String>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `A ⊆ γ(α(A))`, `α(γ(d)) ⊑ d` where γ is computable, and
/// `α(A ∪ B) = α(A) ⊔ α(B)` on consecutive samples.
pub fn check_galois_laws<I: Instance + ?Sized>(
    inst: &I,
    logic_samples: &[Vec<Payload>],
    behaviour_samples: &[LatticeValue],
) -> Result<LawReport, WitnessError> {
    let kind = inst.lattice();
    let mut report = LawReport::default();
    for a in logic_samples {
        let alpha = inst.alpha(a)?;
        for p in a {
            report.checked += 1;
            if !inst.in_gamma(p, &alpha)? {
                report.violations.push(format!("{p} ∉ γ(α(A)) for A of size {}", a.len()));
            }
        }
    }
    for pair in logic_samples.windows(2) {
        report.checked += 1;
        let union: Vec<Payload> = pair[0].iter().chain(&pair[1]).cloned().collect();
        let lhs = inst.alpha(&union)?;
        let rhs = kind.join(&[inst.alpha(&pair[0])?, inst.alpha(&pair[1])?])?;
        if lhs != rhs {
            report.violations.push(format!("α does not preserve the join: {lhs} ≠ {rhs}"));
        }
    }
    let mut skipped = false;
    for d in behaviour_samples {
        match inst.alpha_of_gamma(d) {
            Some(ag) => {
                report.checked += 1;
                if let Some(p) = kind.leq_violation(&ag, d)? {
                    report.violations.push(format!("α(γ(d)) ⋢ d at {p} for d = {d}"));
                }
            }
            None if !skipped => {
                skipped = true;
                report.skipped.push(format!("α(γ(d)) ⊑ d: γ is not finitely computable for the {} instance", inst.tag()));
            }
            None => {}
        }
    }
    Ok(report)
}

/// `α(ℓ(A)) = 𝕓(α(A))` on every sample.
pub fn check_compatibility<I: Instance + ?Sized>(inst: &I, logic_samples: &[Vec<Payload>]) -> Result<LawReport, WitnessError> {
    let mut report = LawReport::default();
    for a in logic_samples {
        report.checked += 1;
        let lhs = inst.alpha_of_logic_step(a)?;
        let rhs = inst.apply(&inst.alpha(a)?)?;
        if lhs != rhs {
            let kind = inst.lattice();
            let at = kind.leq_violation(&lhs, &rhs)?.or(kind.leq_violation(&rhs, &lhs)?);
            report.violations.push(format!(
                "α(ℓ(A)) ≠ 𝕓(α(A)) at {} for A = {{{}}}",
                at.map(|p| format!("{p}")).unwrap_or_default(),
                a.iter().map(|p| format!("{p}")).collect::<Vec<_>>().join(", ")
            ));
        }
    }
    Ok(report)
}
