//! The full pipeline: classification, integrating factor, potential, and
//! the narrative tag summarizing what was found.

mod emit;
pub mod json;
mod trace;

use serde::Serialize;

pub use emit::{csv_traces, emit_report, emit_traces, svg_traces, Format};
pub use trace::{default_seeds, trace_curves, CurveTrace, Termination, TraceOptions, TracePoint};

use crate::cohomology::{self, ClassKind, Classification, ClassifyOptions, PeriodEntry};
use crate::exec::Exec;
use crate::forms::{Domain, OneForm, Point};
use crate::mu::{self, MuCandidate};
use crate::potential::{self, Potential};
use crate::{Error, DEFAULT_RTOL, DEFAULT_SAMPLES, DEFAULT_TOL};

/// Symbolic potentials with a larger derivative residual are replaced by
/// the numeric one.
pub const SYMBOLIC_POTENTIAL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Options {
    pub tol: f64,
    pub samples: usize,
    pub rtol: f64,
    pub exec: Exec,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            tol: DEFAULT_TOL,
            samples: DEFAULT_SAMPLES,
            rtol: DEFAULT_RTOL,
            exec: Exec::default(),
        }
    }
}

impl Options {
    fn classify(&self) -> ClassifyOptions {
        ClassifyOptions {
            tol: self.tol,
            samples: self.samples,
            rtol: self.rtol,
            exec: self.exec,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    ExactGlobalSolution,
    ObstructionMultivalued,
    FactorFoundGlobalSolution,
    FactorFoundObstructionPersists,
    UnsolvedByHeuristics,
}

impl Tag {
    pub fn name(self) -> &'static str {
        match self {
            Tag::ExactGlobalSolution => "exact_global_solution",
            Tag::ObstructionMultivalued => "obstruction_multivalued",
            Tag::FactorFoundGlobalSolution => "factor_found_global_solution",
            Tag::FactorFoundObstructionPersists => "factor_found_obstruction_persists",
            Tag::UnsolvedByHeuristics => "unsolved_by_heuristics",
        }
    }

    pub fn for_report(classification: &Classification, mu: Option<&MuReport>) -> Tag {
        match classification.kind {
            ClassKind::Exact => Tag::ExactGlobalSolution,
            ClassKind::ClosedNotExact => Tag::ObstructionMultivalued,
            ClassKind::NotClosed => match mu.map(|m| m.scaled_classification.kind) {
                Some(ClassKind::Exact) => Tag::FactorFoundGlobalSolution,
                Some(ClassKind::ClosedNotExact) => Tag::FactorFoundObstructionPersists,
                Some(ClassKind::NotClosed) | None => Tag::UnsolvedByHeuristics,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Input {
    #[serde(rename = "M")]
    pub m: String,
    #[serde(rename = "N")]
    pub n: String,
    pub domain: Domain,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MuReport {
    #[serde(flatten)]
    pub candidate: MuCandidate,
    pub scaled_classification: Classification,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub input: Input,
    pub classification: Classification,
    pub mu: Option<MuReport>,
    pub potential: Option<Potential>,
    /// Periods of the input form if closed, else of the scaled form.
    pub periods: Vec<PeriodEntry>,
    pub tag: Tag,
    pub diagnostics: Vec<String>,
}

impl AnalysisReport {
    /// The tag as a function of the report's own fields.
    pub fn recompute_tag(&self) -> Tag {
        Tag::for_report(&self.classification, self.mu.as_ref())
    }

    /// The form whose potential was sought: `mu w` when a factor was used.
    pub fn solved_form(&self, w: &OneForm) -> OneForm {
        match &self.mu {
            Some(m) => crate::forms::scale(w, &m.candidate.mu),
            None => w.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        json::to_string(self)
    }
}

/// Base point for numeric potentials: the rectangle's center, or the first
/// admissible sample when the center is excluded.
pub fn default_base(u: &Domain) -> Point {
    let c = u.center();
    if u.is_admissible(c) {
        c
    } else {
        u.sampler().next().expect("sampler is infinite")
    }
}

pub fn analyze(w: &OneForm, u: &Domain, opts: &Options) -> Result<AnalysisReport, Error> {
    let mut diagnostics = Vec::new();
    let classification = cohomology::classify_with(w, u, &opts.classify())?;
    let mut mu_report = None;
    let mut target = None;
    match classification.kind {
        ClassKind::Exact => target = Some(w.clone()),
        ClassKind::ClosedNotExact => diagnostics.push(format!(
            "closed but not exact: max |period| {} exceeds {}; no single-valued potential exists",
            classification.max_abs_period, classification.period_tolerance
        )),
        ClassKind::NotClosed => {
            let search = mu::find_integrating_factor_with(w, u, opts.exec);
            for r in &search.rejections {
                diagnostics.push(format!("mu {}: {:?}: {}", r.family.name(), r.reason, r.detail));
            }
            match search.found {
                Some((candidate, scaled)) => {
                    match cohomology::classify_with(&scaled, u, &opts.classify()) {
                        Ok(scaled_classification) => {
                            if scaled_classification.is_exact() {
                                target = Some(scaled);
                            }
                            mu_report = Some(MuReport {
                                candidate,
                                scaled_classification,
                            });
                        }
                        Err(e) => diagnostics.push(format!(
                            "classification of mu w failed for mu = {}: {e}",
                            candidate.mu
                        )),
                    }
                }
                None => diagnostics.push(
                    "integrating factor ladder exhausted; this does not prove no factor exists"
                        .to_string(),
                ),
            }
        }
    }
    let mut potential = None;
    if let Some(form) = &target {
        match potential::construct(form, u, default_base(u), SYMBOLIC_POTENTIAL_TOL) {
            Ok(p) => {
                diagnostics.push(format!("potential normalization: {}", p.normalization()));
                potential = Some(p);
            }
            Err(e) => diagnostics.push(format!("potential construction failed: {e}")),
        }
    }
    let periods = classification
        .periods
        .as_ref()
        .or_else(|| mu_report.as_ref().and_then(|m| m.scaled_classification.periods.as_ref()))
        .map(|p| p.entries.clone())
        .unwrap_or_default();
    let tag = Tag::for_report(&classification, mu_report.as_ref());
    Ok(AnalysisReport {
        input: Input {
            m: w.m.to_string(),
            n: w.n.to_string(),
            domain: u.clone(),
        },
        classification,
        mu: mu_report,
        potential,
        periods,
        tag,
        diagnostics,
    })
}
