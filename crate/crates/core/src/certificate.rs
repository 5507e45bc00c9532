//! Certificates and their canonical JSON form.
//!
//! Counts are decimal strings, rationals are `"p/q"` strings in lowest
//! terms, and group elements are component arrays in the encoding documented
//! in [`crate::group`]. Keys are sorted, so the same run always produces the
//! same bytes.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupContext, GroupElement, Limits};
use crate::instances::InstanceSpec;
use crate::json::{to_canonical_string, u64_string};
use crate::ledger::LedgerEntry;
use crate::neighbourhood::{IterationTrace, StepCase, TraceStep};
use crate::rational::Rational;
use crate::set::GSet;

pub const CERTIFICATE_FORMAT: &str = "symgrowth-certificate/1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub instance: InstanceSpec,
    pub k: u32,
    pub epsilon: Rational,
    pub aprime: GSet,
    pub s: GSet,
    pub trace: IterationTrace,
    pub ledger: Vec<LedgerEntry>,
    pub verified: bool,
    /// Not computed; kept for reference alongside the per-run bound.
    pub comparison_bound: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateDoc {
    format: String,
    instance: InstanceSpec,
    #[serde(with = "u64_string")]
    k: u64,
    epsilon: Rational,
    aprime: Vec<Vec<u64>>,
    s: Vec<Vec<u64>>,
    trace: TraceDoc,
    ledger: Vec<LedgerEntry>,
    verified: bool,
    comparison_bound: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceDoc {
    epsilon: Rational,
    #[serde(rename = "K0")]
    k0: Rational,
    #[serde(with = "u64_string")]
    i0: u64,
    steps: Vec<StepDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepDoc {
    #[serde(with = "u64_string")]
    index: u64,
    #[serde(with = "u64_string")]
    aprime_size: u64,
    #[serde(with = "u64_string")]
    aprime_a_size: u64,
    #[serde(with = "u64_string")]
    level_set_size: u64,
    case: StepCase,
    witness: Option<Vec<u64>>,
}

fn encode_set(set: &GSet) -> Vec<Vec<u64>> {
    set.iter().map(|x| set.ctx().components(x)).collect()
}

fn decode_element(ctx: &GroupContext, parts: &[u64]) -> Result<GroupElement> {
    ctx.from_components(parts)
        .map_err(|e| Error::MalformedCertificate(e.to_string()))
}

fn decode_set(ctx: &Arc<GroupContext>, items: &[Vec<u64>]) -> Result<GSet> {
    let elems = items
        .iter()
        .map(|p| decode_element(ctx, p))
        .collect::<Result<Vec<_>>>()?;
    GSet::new(ctx, elems)
}

impl Certificate {
    fn to_doc(&self) -> CertificateDoc {
        let ctx = self.s.ctx();
        CertificateDoc {
            format: CERTIFICATE_FORMAT.to_string(),
            instance: self.instance.clone(),
            k: self.k as u64,
            epsilon: self.epsilon.clone(),
            aprime: encode_set(&self.aprime),
            s: encode_set(&self.s),
            trace: TraceDoc {
                epsilon: self.trace.epsilon.clone(),
                k0: self.trace.k0.clone(),
                i0: self.trace.i0,
                steps: self
                    .trace
                    .steps
                    .iter()
                    .map(|s| StepDoc {
                        index: s.index,
                        aprime_size: s.aprime_size,
                        aprime_a_size: s.aprime_a_size,
                        level_set_size: s.level_set_size,
                        case: s.case,
                        witness: s.witness.map(|w| ctx.components(w)),
                    })
                    .collect(),
            },
            ledger: self.ledger.clone(),
            verified: self.verified,
            comparison_bound: self.comparison_bound.clone(),
        }
    }

    /// Canonical JSON text (sorted keys, trailing newline).
    pub fn to_canonical_json(&self) -> Result<String> {
        to_canonical_string(&self.to_doc())
    }

    pub fn from_json(text: &str) -> Result<Certificate> {
        Certificate::from_json_with(text, Limits::default())
    }

    pub fn from_json_with(text: &str, limits: Limits) -> Result<Certificate> {
        let doc: CertificateDoc =
            serde_json::from_str(text).map_err(|e| Error::MalformedCertificate(e.to_string()))?;
        if doc.format != CERTIFICATE_FORMAT {
            return Err(Error::MalformedCertificate(format!(
                "unknown format {:?}",
                doc.format
            )));
        }
        let k = u32::try_from(doc.k).map_err(|_| Error::MalformedCertificate("k out of range".into()))?;
        let ctx = doc
            .instance
            .context(limits)
            .map_err(|e| Error::MalformedCertificate(e.to_string()))?;
        let steps = doc
            .trace
            .steps
            .iter()
            .map(|s| {
                Ok(TraceStep {
                    index: s.index,
                    aprime_size: s.aprime_size,
                    aprime_a_size: s.aprime_a_size,
                    level_set_size: s.level_set_size,
                    case: s.case,
                    witness: s
                        .witness
                        .as_deref()
                        .map(|w| decode_element(&ctx, w))
                        .transpose()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Certificate {
            instance: doc.instance,
            k,
            epsilon: doc.epsilon,
            aprime: decode_set(&ctx, &doc.aprime)?,
            s: decode_set(&ctx, &doc.s)?,
            trace: IterationTrace {
                epsilon: doc.trace.epsilon,
                k0: doc.trace.k0,
                i0: doc.trace.i0,
                steps,
            },
            ledger: doc.ledger,
            verified: doc.verified,
            comparison_bound: doc.comparison_bound,
        })
    }
}

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn write_atomically(path: &Path, contents: &str) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(std::io::Error::other("output path has no file name")))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, contents)?;
    if let Err(e) = std::fs::rename(&tmp, path) {
        let _ = std::fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

pub fn emit_certificate(cert: &Certificate, path: &Path) -> Result<()> {
    write_atomically(path, &cert.to_canonical_json()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::generate;
    use crate::neighbourhood::theorem_for_instance;

    fn interval_cert() -> Certificate {
        let spec = InstanceSpec::from_json(
            r#"{"group": {"type": "cyclic", "n": 20}, "set": {"type": "interval", "start": 0, "length": 5}}"#,
        )
        .unwrap();
        let a = generate(&spec).unwrap();
        theorem_for_instance(&spec, &a, 2).unwrap()
    }

    #[test]
    fn round_trips_byte_for_byte() {
        let cert = interval_cert();
        let text = cert.to_canonical_json().unwrap();
        let back = Certificate::from_json(&text).unwrap();
        assert_eq!(back, cert);
        assert_eq!(back.to_canonical_json().unwrap(), text);
        assert_eq!(interval_cert().to_canonical_json().unwrap(), text);
    }

    #[test]
    fn ledger_renders_exact_fractions() {
        let text = interval_cert().to_canonical_json().unwrap();
        assert!(text.contains("\"rhs\": \"25/18\""), "{text}");
        assert!(text.contains("\"epsilon\": \"1/3\""));
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(
            Certificate::from_json("{}"),
            Err(Error::MalformedCertificate(_))
        ));
        let text = interval_cert().to_canonical_json().unwrap();
        let bad = text.replace(CERTIFICATE_FORMAT, "other/9");
        assert!(matches!(
            Certificate::from_json(&bad),
            Err(Error::MalformedCertificate(_))
        ));
    }

    #[test]
    fn atomic_write() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cert.json");
        emit_certificate(&interval_cert(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(Certificate::from_json(&text).unwrap().verified);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
