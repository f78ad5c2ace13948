//! Serializable report document and its JSON/CSV renderings.

use serde::{Deserialize, Serialize};

use nlmeas::experiments::{ExperimentReport, Section};
use nlmeas::qstate::IMPOSSIBLE_CUTOFF;

use crate::args::{Format, RunConfig};

/// Bumped whenever a field is added, removed or renamed.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ImpossiblePostselection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub config: RunConfig,
    pub experiment: String,
    pub status: Status,
    pub sections: Vec<SectionDoc>,
    /// Wall-clock time; the only field that differs between identical runs.
    pub duration_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionDoc {
    pub label: String,
    pub description: String,
    pub exact: Vec<BlockDoc>,
    pub counts: Vec<TableDoc>,
    pub postselection: Option<PostselectionDoc>,
    pub impossible: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDoc {
    pub name: String,
    pub entries: Vec<EntryDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryDoc {
    pub label: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableDoc {
    pub name: String,
    pub total: u64,
    pub entries: Vec<CountDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountDoc {
    pub label: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostselectionDoc {
    pub probability: Option<String>,
    pub accepted: Option<u64>,
    pub rejected: Option<u64>,
}

/// Decimal string with 12 significant digits. Magnitudes below the
/// impossibility cutoff print as `0`.
pub fn format_value(v: f64) -> String {
    if v.abs() < IMPOSSIBLE_CUTOFF {
        return "0".to_string();
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("scientific literal");
    format!("{rounded}")
}

impl ReportDocument {
    /// Builds the document, keeping exact or sampled parts per the config's mode.
    pub fn new(config: &RunConfig, report: &ExperimentReport, duration_ms: u64) -> Self {
        let status = if report.postselection_impossible() {
            Status::ImpossiblePostselection
        } else {
            Status::Ok
        };
        let sections = report
            .sections
            .iter()
            .map(|s| section_doc(s, config))
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            config: config.clone(),
            experiment: report.experiment.clone(),
            status,
            sections,
            duration_ms,
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// One row per (section, block, label) with a header.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["experiment", "section", "kind", "block", "label", "value"])?;
        let exp = self.experiment.as_str();
        for s in &self.sections {
            for b in &s.exact {
                for e in &b.entries {
                    w.write_record([exp, &s.label, "exact", &b.name, &e.label, &e.value])?;
                }
            }
            for t in &s.counts {
                for e in &t.entries {
                    w.write_record([
                        exp,
                        &s.label,
                        "count",
                        &t.name,
                        &e.label,
                        &e.count.to_string(),
                    ])?;
                }
            }
            if let Some(p) = &s.postselection {
                let fields = [
                    ("probability", p.probability.clone()),
                    ("accepted", p.accepted.map(|n| n.to_string())),
                    ("rejected", p.rejected.map(|n| n.to_string())),
                ];
                for (label, value) in fields {
                    if let Some(value) = value {
                        w.write_record([
                            exp,
                            &s.label,
                            "postselection",
                            "postselection",
                            label,
                            &value,
                        ])?;
                    }
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn render(&self, format: Format) -> Result<String, crate::RunError> {
        Ok(match format {
            Format::Json => self.to_json()?,
            Format::Csv => self.to_csv()?,
        })
    }
}

fn section_doc(s: &Section, config: &RunConfig) -> SectionDoc {
    let exact = if config.mode.exact() {
        s.exact
            .iter()
            .map(|b| BlockDoc {
                name: b.name.clone(),
                entries: b
                    .entries
                    .iter()
                    .map(|q| EntryDoc {
                        label: q.label.clone(),
                        value: format_value(q.value),
                    })
                    .collect(),
            })
            .collect()
    } else {
        Vec::new()
    };
    let counts = s
        .counts
        .iter()
        .map(|t| TableDoc {
            name: t.name.clone(),
            total: t.table.total(),
            entries: t
                .table
                .labels()
                .iter()
                .zip(t.table.counts())
                .map(|(label, &count)| CountDoc {
                    label: label.clone(),
                    count,
                })
                .collect(),
        })
        .collect();
    let postselection = s.postselection.map(|p| PostselectionDoc {
        probability: config.mode.exact().then(|| format_value(p.probability)),
        accepted: p.accepted,
        rejected: p.rejected,
    });
    SectionDoc {
        label: s.label.clone(),
        description: s.description.clone(),
        exact,
        counts,
        postselection,
        impossible: s.impossible.clone(),
    }
}
