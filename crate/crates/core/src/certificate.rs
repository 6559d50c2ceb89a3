//! Tamper-evident norm certificates and the per-`n` violation report.
//!
//! A [`NormCertificate`] packages one bound (upper or lower) on a named
//! tensor norm together with the ordered provenance of verified facts it
//! rests on. Construction fails if any fact's residual exceeds its declared
//! tolerance, and each fact carries a running digest chained from its
//! predecessor, so deleting or reordering provenance steps is detectable
//! with [`NormCertificate::verify_chain`].

use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::Result;

/// Whether a certificate bounds the norm from above or below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Upper,
    Lower,
}

/// One verified fact: the operation checked, a digest of its inputs, the
/// measured residual against the declared tolerance, and the chained digest.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FactRecord {
    pub name: String,
    pub anchor: String,
    pub inputs_digest: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub digest: String,
}

/// An unchained fact, as produced by check routines.
#[derive(Debug, Clone)]
pub struct Fact {
    pub name: String,
    pub anchor: String,
    pub inputs: String,
    pub residual: f64,
    pub tolerance: f64,
}

impl Fact {
    pub fn new(
        name: impl Into<String>,
        anchor: impl Into<String>,
        inputs: impl Into<String>,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            inputs: inputs.into(),
            residual,
            tolerance,
        }
    }

    pub fn passes(&self) -> bool {
        self.residual.is_finite() && self.residual <= self.tolerance
    }
}

fn short_hex(bytes: &[u8]) -> String {
    bytes.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Certified bound with its ordered, digest-chained provenance.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NormCertificate {
    pub norm_name: String,
    pub direction: Direction,
    pub value: f64,
    pub tolerance: f64,
    pub provenance: Vec<FactRecord>,
}

impl NormCertificate {
    /// Builds the certificate, verifying every fact; the first failing fact
    /// aborts construction.
    pub fn build(
        norm_name: impl Into<String>,
        direction: Direction,
        value: f64,
        tolerance: f64,
        facts: Vec<Fact>,
    ) -> Result<Self> {
        let norm_name = norm_name.into();
        let mut provenance = Vec::with_capacity(facts.len());
        let mut prev_digest = {
            let mut h = Sha256::new();
            h.update(norm_name.as_bytes());
            h.update(value.to_le_bytes());
            short_hex(&h.finalize())
        };
        for fact in facts {
            if !fact.passes() {
                return Err(Error::CertificateFailed {
                    name: fact.name,
                    residual: fact.residual,
                    tolerance: fact.tolerance,
                });
            }
            let inputs_digest = {
                let mut h = Sha256::new();
                h.update(fact.inputs.as_bytes());
                short_hex(&h.finalize())
            };
            let digest = {
                let mut h = Sha256::new();
                h.update(prev_digest.as_bytes());
                h.update(fact.name.as_bytes());
                h.update(inputs_digest.as_bytes());
                h.update(fact.residual.to_le_bytes());
                h.update(fact.tolerance.to_le_bytes());
                short_hex(&h.finalize())
            };
            provenance.push(FactRecord {
                name: fact.name,
                anchor: fact.anchor,
                inputs_digest,
                residual: fact.residual,
                tolerance: fact.tolerance,
                pass: true,
                digest: digest.clone(),
            });
            prev_digest = digest;
        }
        Ok(Self {
            norm_name,
            direction,
            value,
            tolerance,
            provenance,
        })
    }

    /// Recomputes the digest chain; false if any step was removed,
    /// reordered, or edited.
    pub fn verify_chain(&self) -> bool {
        let mut prev = {
            let mut h = Sha256::new();
            h.update(self.norm_name.as_bytes());
            h.update(self.value.to_le_bytes());
            short_hex(&h.finalize())
        };
        for record in &self.provenance {
            if !record.pass || !(record.residual <= record.tolerance) {
                return false;
            }
            let digest = {
                let mut h = Sha256::new();
                h.update(prev.as_bytes());
                h.update(record.name.as_bytes());
                h.update(record.inputs_digest.as_bytes());
                h.update(record.residual.to_le_bytes());
                h.update(record.tolerance.to_le_bytes());
                short_hex(&h.finalize())
            };
            if digest != record.digest {
                return false;
            }
            prev = digest;
        }
        true
    }
}

/// One row of the violation report.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ReportRow {
    pub n: usize,
    pub lower_bound: f64,
    pub upper_bound_stated: f64,
    pub upper_bound_sharp: f64,
    pub ratio: f64,
    pub all_checks_passed: bool,
    pub certified: bool,
}

/// Per-`n` table of certified bounds and their ratio `n^(1/4) / sqrt(2)`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ViolationReport {
    pub rows: Vec<ReportRow>,
}

impl ViolationReport {
    /// Checks the row invariant `ratio == lower / upper_stated` within
    /// 1e-12 and strict monotonicity of the ratios.
    pub fn validate(&self) -> Result<()> {
        let mut prev = f64::NEG_INFINITY;
        for row in &self.rows {
            let expect = row.lower_bound / row.upper_bound_stated;
            if (row.ratio - expect).abs() > 1e-12 {
                return Err(Error::CertificateFailed {
                    name: format!("ratio row n={}", row.n),
                    residual: (row.ratio - expect).abs(),
                    tolerance: 1e-12,
                });
            }
            if row.ratio <= prev {
                return Err(Error::CertificateFailed {
                    name: format!("ratio monotonicity at n={}", row.n),
                    residual: prev - row.ratio,
                    tolerance: 0.0,
                });
            }
            prev = row.ratio;
        }
        Ok(())
    }
}
