//! JSON formats: instrument files, report envelopes and line-delimited
//! trajectory logs.
//!
//! Coefficients are written as `[re, im]` using the shortest decimal that
//! reads back to the same `f64`, so parse ∘ serialize is lossless.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::certify::{CertificationReport, PovmClassification};
use crate::config;
use crate::error::{Error, Result};
use crate::instruments::{make_instrument, Instrument, Outcome, Povm};
use crate::opalgebra::{BasisIndex, Coefficient, DyadTerm, ShiftFamilyTerm, StateVector, StructuredOperator, Term};
use crate::simulate::TrajectoryRecord;
use crate::wold::{SplitParts, WoldDecomposition};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TermRecord {
    Dyad {
        coeff: [f64; 2],
        out: BasisIndex,
        #[serde(rename = "in")]
        input: BasisIndex,
    },
    Family {
        coeff: [f64; 2],
        #[serde(rename = "outStride")]
        out_stride: u64,
        #[serde(rename = "outOffset")]
        out_offset: u64,
        #[serde(rename = "inStride")]
        in_stride: u64,
        #[serde(rename = "inOffset")]
        in_offset: u64,
        #[serde(rename = "jStart", default)]
        j_start: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct OutcomeRecord {
    pub label: u32,
    pub terms: Vec<TermRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct InstrumentFile {
    pub schema_version: String,
    pub outcomes: Vec<OutcomeRecord>,
}

fn pair(c: Coefficient) -> [f64; 2] {
    [c.re, c.im]
}

fn coefficient(c: [f64; 2], at: &str) -> Result<Coefficient> {
    if c.iter().all(|x| x.is_finite()) {
        Ok(Coefficient::new(c[0], c[1]))
    } else {
        Err(Error::Format(format!("{at}: coefficient must be finite")))
    }
}

pub fn term_records(op: &StructuredOperator) -> Vec<TermRecord> {
    op.terms()
        .into_iter()
        .map(|t| match t {
            Term::Dyad(d) => TermRecord::Dyad { coeff: pair(d.coeff), out: d.out, input: d.input },
            Term::Family(f) => TermRecord::Family {
                coeff: pair(f.coeff),
                out_stride: f.out_stride,
                out_offset: f.out_offset,
                in_stride: f.in_stride,
                in_offset: f.in_offset,
                j_start: f.j_start,
            },
        })
        .collect()
}

pub fn operator_from_records(records: &[TermRecord], at: &str) -> Result<StructuredOperator> {
    let mut terms = Vec::with_capacity(records.len());
    for (k, r) in records.iter().enumerate() {
        let here = format!("{at}.terms[{k}]");
        terms.push(match *r {
            TermRecord::Dyad { coeff, out, input } => Term::Dyad(DyadTerm { coeff: coefficient(coeff, &here)?, out, input }),
            TermRecord::Family { coeff, out_stride, out_offset, in_stride, in_offset, j_start } => {
                Term::Family(ShiftFamilyTerm {
                    coeff: coefficient(coeff, &here)?,
                    out_stride,
                    out_offset,
                    in_stride,
                    in_offset,
                    j_start,
                })
            }
        });
    }
    StructuredOperator::from_terms(terms).map_err(|e| Error::Format(format!("{at}: {e}")))
}

impl InstrumentFile {
    pub fn from_instrument(inst: &Instrument) -> Self {
        InstrumentFile {
            schema_version: SCHEMA_VERSION.into(),
            outcomes: inst.iter().map(|(e, m)| OutcomeRecord { label: e.0, terms: term_records(m) }).collect(),
        }
    }

    pub fn operators(&self) -> Result<BTreeMap<Outcome, StructuredOperator>> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "schemaVersion: expected \"{SCHEMA_VERSION}\", found \"{}\"",
                self.schema_version
            )));
        }
        let mut entries = BTreeMap::new();
        for (k, o) in self.outcomes.iter().enumerate() {
            let op = operator_from_records(&o.terms, &format!("outcomes[{k}]"))?;
            if entries.insert(Outcome(o.label), op).is_some() {
                return Err(Error::Format(format!("outcomes[{k}].label: duplicate label {}", o.label)));
            }
        }
        Ok(entries)
    }

    /// Builds the instrument, verifying contraction and completeness.
    pub fn to_instrument(&self) -> Result<Instrument> {
        make_instrument(self.operators()?, true)
    }
}

pub fn serialize_instrument(inst: &Instrument) -> String {
    to_pretty(&InstrumentFile::from_instrument(inst))
}

/// Parses and validates an instrument file. Syntax errors carry the line
/// and column; structural errors carry the offending field path.
pub fn parse_instrument(text: &str) -> Result<Instrument> {
    let file: InstrumentFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    file.to_instrument()
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// An operator as its canonical term list plus a readable rendering.
pub fn operator_value(op: &StructuredOperator) -> Value {
    json!({ "terms": term_records(op), "text": op.to_string() })
}

/// Versioned envelope shared by every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportFile {
    pub schema_version: String,
    pub kind: String,
    pub summary: String,
    pub report: Value,
}

impl ReportFile {
    pub fn new(kind: &str, summary: String, report: Value) -> Self {
        ReportFile { schema_version: SCHEMA_VERSION.into(), kind: kind.into(), summary, report }
    }

    pub fn render(&self) -> String {
        to_pretty(self)
    }
}

fn yes_no(b: bool) -> &'static str {
    if b { "yes" } else { "no" }
}

pub fn certification_report(report: &CertificationReport) -> ReportFile {
    let mut summary = format!(
        "complete: {}; repeatable: {}; orthogonal POVM: {}",
        yes_no(report.complete),
        yes_no(report.repeatable),
        yes_no(report.orthogonal)
    );
    if let Some(w) = report.witnesses.first() {
        let pair = match (w.outcome, w.other) {
            (Some(e), Some(f)) => format!(" for (e, f) = ({e}, {f})"),
            (Some(e), None) => format!(" for e = {e}"),
            _ => String::new(),
        };
        summary.push_str(&format!(
            "; {} fails{pair} at ({}, {}) with value {}",
            w.condition, w.deviation.row, w.deviation.col, w.deviation.value
        ));
    }
    let value = serde_json::to_value(report).expect("report serializes");
    ReportFile::new("certification", summary, value)
}

pub fn povm_report(povm: &Povm, orthogonal: bool) -> ReportFile {
    let effects: Vec<Value> = povm
        .iter()
        .map(|(e, p)| json!({ "label": e, "effect": operator_value(p) }))
        .collect();
    let summary = format!("{} effects; orthogonal: {}", povm.len(), yes_no(orthogonal));
    ReportFile::new("povm", summary, json!({ "orthogonal": orthogonal, "effects": effects }))
}

pub fn classification_report(c: &PovmClassification) -> ReportFile {
    let per_outcome: Vec<Value> = c
        .per_outcome
        .iter()
        .map(|(e, (z, t))| json!({ "label": e, "z": operator_value(z), "t": operator_value(t) }))
        .collect();
    let summary = format!(
        "admits repeatable form: {}; Z_ω = {}",
        yes_no(c.admits_repeatable_form),
        c.z_omega
    );
    let value = json!({
        "admitsRepeatableForm": c.admits_repeatable_form,
        "perOutcome": per_outcome,
        "zOmega": operator_value(&c.z_omega),
    });
    ReportFile::new("classification", summary, value)
}

/// Per-outcome split and decomposition, or the reason it is unavailable.
pub type OutcomeDecomposition = std::result::Result<(SplitParts, WoldDecomposition), Error>;

pub fn wold_report(decomps: &BTreeMap<Outcome, OutcomeDecomposition>) -> ReportFile {
    let mut lines = Vec::new();
    let mut entries = Vec::new();
    for (e, d) in decomps {
        match d {
            Ok((parts, w)) => {
                lines.push(format!("outcome {e}: generators {}, unitary domain {}", w.generators, w.unitary_domain));
                entries.push(json!({
                    "label": e,
                    "v": operator_value(&parts.v),
                    "w": operator_value(&parts.w),
                    "defectGram": operator_value(&parts.w.adjoint().compose(&parts.w)),
                    "u": operator_value(&w.u),
                    "s": operator_value(&w.s),
                    "generators": w.generators,
                    "shiftDomain": w.shift_domain,
                    "unitaryDomain": w.unitary_domain,
                    "window": w.window,
                    "shiftOrbits": w.shift_orbits,
                    "cycles": w.cycles,
                    "bilateral": w.bilateral,
                }));
            }
            Err(err) => {
                lines.push(format!("outcome {e}: {err}"));
                entries.push(json!({ "label": e, "error": err.to_string() }));
            }
        }
    }
    ReportFile::new("wold", lines.join("; "), json!({ "outcomes": entries }))
}

/// One JSON object per line: a header with the seed and initial state,
/// then one line per step.
pub fn trajectory_jsonl(record: &TrajectoryRecord) -> String {
    let mut out = serde_json::to_string(&json!({
        "kind": "trajectory",
        "schemaVersion": SCHEMA_VERSION,
        "seed": record.seed,
        "initialState": record.initial_state,
    }))
    .expect("header serializes");
    out.push('\n');
    for step in &record.steps {
        let mut line = serde_json::to_value(step).expect("step serializes");
        line["kind"] = json!("step");
        out.push_str(&serde_json::to_string(&line).expect("step serializes"));
        out.push('\n');
    }
    out
}

/// Parses an initial state: a basis index (`"3"`) or a JSON amplitude list
/// (`[[0, [0.6, 0]], [3, [0, 0.8]]]`). Returns the normalized state and
/// whether normalization changed it by more than the tolerance.
pub fn parse_state(text: &str) -> Result<(StateVector, bool)> {
    let text = text.trim();
    if let Ok(i) = text.parse::<BasisIndex>() {
        return Ok((StateVector::basis(i), false));
    }
    let amps: Vec<(BasisIndex, [f64; 2])> =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("initial state: {e}")))?;
    let mut list = Vec::with_capacity(amps.len());
    for (i, c) in amps {
        list.push((i, coefficient(c, "initial state")?));
    }
    let raw = StateVector::from_amplitudes(list);
    let adjusted = (raw.norm() - 1.0).abs() > config::tolerance();
    let psi = raw.normalized().ok_or_else(|| Error::Format("initial state is zero".into()))?;
    Ok((psi, adjusted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instruments::{build_binary_example, build_example_family};

    #[test]
    fn instrument_round_trip() {
        for inst in [
            build_example_family(2, &[0.5, 0.5]).unwrap(),
            build_example_family(3, &[0.1, 0.2, 0.7]).unwrap(),
            build_binary_example(0.3, 0.7).unwrap(),
        ] {
            let text = serialize_instrument(&inst);
            let back = parse_instrument(&text).unwrap();
            assert!(back.equals(&inst).unwrap());
            assert_eq!(serialize_instrument(&back), text);
        }
    }

    #[test]
    fn file_layout() {
        let text = r#"{"schemaVersion":"1","outcomes":[
            {"label":1,"terms":[{"kind":"family","coeff":[1,0],"outStride":1,"outOffset":0,"inStride":1,"inOffset":0,"jStart":0}]}]}"#;
        let inst = parse_instrument(text).unwrap();
        assert!(inst.get(Outcome(1)).unwrap().equals(&StructuredOperator::identity()).unwrap());
        let v: Value = serde_json::from_str(&serialize_instrument(&inst)).unwrap();
        assert_eq!(v["outcomes"][0]["terms"][0]["kind"], "family");
        assert_eq!(v["outcomes"][0]["terms"][0]["inStride"], 1);
    }

    #[test]
    fn parse_errors() {
        let err = parse_instrument("{\n\"schemaVersion\": \"1\",\n\"outcomes\": [ }").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = parse_instrument(r#"{"schemaVersion":"2","outcomes":[]}"#).unwrap_err();
        assert!(err.to_string().contains("schemaVersion"));
        let dup = r#"{"schemaVersion":"1","outcomes":[{"label":1,"terms":[]},{"label":1,"terms":[]}]}"#;
        assert!(parse_instrument(dup).unwrap_err().to_string().contains("outcomes[1].label"));
        let stride0 = r#"{"schemaVersion":"1","outcomes":[{"label":1,"terms":[{"kind":"family","coeff":[1,0],"outStride":0,"outOffset":0,"inStride":1,"inOffset":0}]}]}"#;
        assert!(parse_instrument(stride0).unwrap_err().to_string().contains("outcomes[0]"));
        let incomplete = r#"{"schemaVersion":"1","outcomes":[{"label":1,"terms":[{"kind":"dyad","coeff":[1,0],"out":0,"in":0}]}]}"#;
        assert!(matches!(parse_instrument(incomplete), Err(Error::CompletenessViolation { .. })));
    }

    #[test]
    fn states() {
        assert_eq!(parse_state("4").unwrap(), (StateVector::basis(4), false));
        let (psi, adjusted) = parse_state("[[0,[0.6,0]],[3,[0,0.8]]]").unwrap();
        assert!(!adjusted && psi.is_normalized());
        let (psi, adjusted) = parse_state("[[1,[2,0]]]").unwrap();
        assert!(adjusted);
        assert_eq!(psi, StateVector::basis(1));
        assert!(parse_state("[[1,[0,0]]]").is_err());
        assert!(parse_state("x").is_err());
    }
}
