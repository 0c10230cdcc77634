//! Consistency, conciseness, and correctness checks over a graph's taxonomy:
//! subclass cycles, redundant (transitively implied) subclass edges, shared
//! labels, classes that never reach the root, naming-convention drift, and
//! domain/range conformance. Conciseness is operationalized as
//! REDUNDANT_EDGE + DUPLICATE_LABEL; nothing is auto-repaired.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::rdf::{vocab, Graph, Slot, Term, TriplePattern};

use super::taxonomy::{build_property_schema, build_taxonomy, PropertySchema, Taxonomy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LintCode {
    Cycle,
    RedundantEdge,
    DuplicateLabel,
    OrphanClass,
    DomainViolation,
    RangeViolation,
    Naming,
}

impl LintCode {
    pub fn as_str(self) -> &'static str {
        match self {
            LintCode::Cycle => "CYCLE",
            LintCode::RedundantEdge => "REDUNDANT_EDGE",
            LintCode::DuplicateLabel => "DUPLICATE_LABEL",
            LintCode::OrphanClass => "ORPHAN_CLASS",
            LintCode::DomainViolation => "DOMAIN_VIOLATION",
            LintCode::RangeViolation => "RANGE_VIOLATION",
            LintCode::Naming => "NAMING",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Finding {
    pub code: LintCode,
    pub severity: Severity,
    pub subjects: Vec<String>,
    pub message: String,
}

/// Findings in deterministic order: by code, then subjects, then message.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LintReport {
    pub findings: Vec<Finding>,
}

impl LintReport {
    fn from_findings(mut findings: Vec<Finding>) -> LintReport {
        findings.sort();
        findings.dedup();
        LintReport { findings }
    }

    pub fn error_count(&self) -> usize {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
            .count()
    }

    pub fn has_code(&self, code: LintCode) -> bool {
        self.findings.iter().any(|f| f.code == code)
    }

    pub fn findings_with(&self, code: LintCode) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(move |f| f.code == code)
    }

    /// One line per finding: `code<TAB>severity<TAB>subjects<TAB>message`,
    /// subjects comma-joined, LF line endings.
    pub fn to_machine_lines(&self) -> String {
        let mut out = String::new();
        for f in &self.findings {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                f.code.as_str(),
                f.severity.as_str(),
                f.subjects.join(","),
                f.message
            );
        }
        out
    }

    /// Human-readable table.
    pub fn to_table(&self) -> String {
        if self.findings.is_empty() {
            return "no findings\n".to_string();
        }
        let mut out = String::new();
        let code_w = self
            .findings
            .iter()
            .map(|f| f.code.as_str().len())
            .max()
            .unwrap_or(4)
            .max("CODE".len());
        let _ = writeln!(out, "{:<code_w$}  {:<7}  MESSAGE [SUBJECTS]", "CODE", "SEVERITY");
        for f in &self.findings {
            let _ = writeln!(
                out,
                "{:<code_w$}  {:<7}  {} [{}]",
                f.code.as_str(),
                f.severity.as_str(),
                f.message,
                f.subjects.join(", ")
            );
        }
        out
    }
}

fn local_name(iri: &str) -> &str {
    let cut = iri.rfind(['#', '/']).map(|i| i + 1).unwrap_or(0);
    &iri[cut..]
}

fn is_camel_case(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase())
        && chars.all(|c| c.is_ascii_alphanumeric())
}

fn is_lower_camel_case(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric())
}

/// Strongly connected components of the subclass relation, via mutual
/// reachability in the (already reflexive-transitive) closure.
fn scc_representative(tax: &Taxonomy) -> BTreeMap<&str, &str> {
    let mut rep: BTreeMap<&str, &str> = BTreeMap::new();
    for a in &tax.classes {
        let group_min = tax.closure[a]
            .iter()
            .filter(|b| tax.closure[*b].contains(a))
            .min()
            .expect("closure is reflexive");
        rep.insert(a.as_str(), group_min.as_str());
    }
    rep
}

fn cycle_findings(tax: &Taxonomy) -> Vec<Finding> {
    let rep = scc_representative(tax);
    let mut groups: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (member, r) in &rep {
        groups.entry(r).or_default().insert(member);
    }
    let mut out = Vec::new();
    for (_, members) in groups {
        let self_loop = members.len() == 1 && {
            let m = *members.iter().next().unwrap();
            tax.edges.get(m).is_some_and(|ps| ps.contains(m))
        };
        if members.len() >= 2 || self_loop {
            let subjects: Vec<String> = members.iter().map(|s| s.to_string()).collect();
            out.push(Finding {
                code: LintCode::Cycle,
                severity: Severity::Error,
                message: format!(
                    "incompatible subclass relationship: {} classes form a subclass cycle",
                    subjects.len()
                ),
                subjects,
            });
        }
    }
    out
}

/// An edge is redundant when, on the cycle-condensed DAG, another path of
/// length >= 2 connects its endpoints. Removing every redundant edge leaves
/// the closure unchanged (within-cycle edges are never flagged; they are
/// CYCLE findings instead).
fn redundant_edge_findings(tax: &Taxonomy) -> Vec<Finding> {
    let rep = scc_representative(tax);
    let mut cond_edges: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (child, parents) in &tax.edges {
        for parent in parents {
            let (rc, rp) = (rep[child.as_str()], rep[parent.as_str()]);
            if rc != rp {
                cond_edges.entry(rc).or_default().insert(rp);
            }
        }
    }
    let reaches = |from: &str, to: &str| tax.closure[from].contains(to);

    let mut out = Vec::new();
    for (child, parents) in &tax.edges {
        for parent in parents {
            let (rc, rp) = (rep[child.as_str()], rep[parent.as_str()]);
            if rc == rp {
                continue;
            }
            let implied = cond_edges
                .get(rc)
                .is_some_and(|mids| mids.iter().any(|mid| *mid != rp && reaches(mid, rp)));
            if implied {
                out.push(Finding {
                    code: LintCode::RedundantEdge,
                    severity: Severity::Warning,
                    subjects: vec![child.clone(), parent.clone()],
                    message: "subclass edge is implied by other edges (excessiveness)".to_string(),
                });
            }
        }
    }
    out
}

fn duplicate_label_findings(graph: &Graph, tax: &Taxonomy) -> Vec<Finding> {
    let label_pattern = TriplePattern::new(
        Slot::Var("s".into()),
        Slot::Term(Term::Iri(vocab::RDFS_LABEL.to_string())),
        Slot::Var("o".into()),
    );
    let mut by_label: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for t in graph.match_pattern(&label_pattern) {
        let Some(class) = t.subject.as_iri() else { continue };
        if !tax.classes.contains(class) {
            continue;
        }
        if let Term::Literal { lexical, .. } = &t.object {
            by_label.entry(lexical.clone()).or_default().insert(class.to_string());
        }
    }
    let mut out = Vec::new();
    for (label, classes) in by_label {
        if classes.len() >= 2 {
            out.push(Finding {
                code: LintCode::DuplicateLabel,
                severity: Severity::Warning,
                subjects: classes.into_iter().collect(),
                message: format!("terminological ambiguity: classes share the label {label:?}"),
            });
        }
    }
    out
}

fn orphan_findings(tax: &Taxonomy) -> Vec<Finding> {
    let mut out = Vec::new();
    for class in &tax.classes {
        if class != &tax.root && !tax.closure[class].contains(&tax.root) {
            out.push(Finding {
                code: LintCode::OrphanClass,
                severity: Severity::Warning,
                subjects: vec![class.clone()],
                message: format!("class has no subclass path to {}", tax.root),
            });
        }
    }
    out
}

fn naming_findings(tax: &Taxonomy, schema: &PropertySchema) -> Vec<Finding> {
    let mut out = Vec::new();
    for class in &tax.classes {
        let name = local_name(class);
        if !is_camel_case(name) {
            out.push(Finding {
                code: LintCode::Naming,
                severity: Severity::Warning,
                subjects: vec![class.clone()],
                message: format!("class local name {name:?} is not CamelCase"),
            });
        }
    }
    for prop in schema.properties.keys() {
        let name = local_name(prop);
        if !is_lower_camel_case(name) {
            out.push(Finding {
                code: LintCode::Naming,
                severity: Severity::Warning,
                subjects: vec![prop.clone()],
                message: format!("property local name {name:?} is not lowerCamelCase"),
            });
        }
    }
    out
}

/// Domain/range conformance. A definite type mismatch is an error; a subject
/// or object with no declared type at all (literals included) is a warning.
/// Properties without the relevant declaration never produce findings.
pub fn validate_domain_range(
    graph: &Graph,
    tax: &Taxonomy,
    schema: &PropertySchema,
) -> Vec<Finding> {
    let mut out = Vec::new();
    let types_of = |term: &Term| -> BTreeSet<String> {
        let p = TriplePattern::new(
            Slot::Term(term.clone()),
            Slot::Term(Term::Iri(vocab::RDF_TYPE.to_string())),
            Slot::Var("t".into()),
        );
        graph
            .match_pattern(&p)
            .into_iter()
            .filter_map(|t| t.object.as_iri().map(str::to_string))
            .collect()
    };
    let conforms = |types: &BTreeSet<String>, constraint: &str| {
        types.iter().any(|t| {
            tax.classes.contains(t)
                && tax.classes.contains(constraint)
                && tax.closure[t].contains(constraint)
        })
    };

    for (prop, constraint) in &schema.properties {
        if constraint.domain.is_none() && constraint.range.is_none() {
            continue;
        }
        for (side, declared, code) in [
            ("domain", &constraint.domain, LintCode::DomainViolation),
            ("range", &constraint.range, LintCode::RangeViolation),
        ] {
            let Some(required) = declared else { continue };
            if !tax.classes.contains(required) {
                out.push(Finding {
                    code,
                    severity: Severity::Warning,
                    subjects: vec![prop.clone(), required.clone()],
                    message: format!("declared {side} is not a known class"),
                });
                continue;
            }
            let usage = TriplePattern::new(
                Slot::Var("s".into()),
                Slot::Term(Term::Iri(prop.clone())),
                Slot::Var("o".into()),
            );
            let mut seen: BTreeSet<String> = BTreeSet::new();
            for t in graph.match_pattern(&usage) {
                let node = if side == "domain" { &t.subject } else { &t.object };
                let token = node.to_string();
                if !seen.insert(token.clone()) {
                    continue;
                }
                if node.is_literal() {
                    out.push(Finding {
                        code,
                        severity: Severity::Warning,
                        subjects: vec![prop.clone(), token],
                        message: format!("literal cannot be typed against the declared {side} {required}"),
                    });
                    continue;
                }
                let types = types_of(node);
                if types.is_empty() {
                    out.push(Finding {
                        code,
                        severity: Severity::Warning,
                        subjects: vec![prop.clone(), token],
                        message: format!("{side} node has no declared type"),
                    });
                } else if !conforms(&types, required) {
                    out.push(Finding {
                        code,
                        severity: Severity::Error,
                        subjects: vec![prop.clone(), token],
                        message: format!("no declared type is a subclass of the {side} {required}"),
                    });
                }
            }
        }
    }
    out
}

/// Run every check and return the deterministic report.
pub fn consistency_report(graph: &Graph) -> LintReport {
    let tax = build_taxonomy(graph);
    let schema = build_property_schema(graph);
    let mut findings = Vec::new();
    findings.extend(cycle_findings(&tax));
    findings.extend(redundant_edge_findings(&tax));
    findings.extend(duplicate_label_findings(graph, &tax));
    findings.extend(orphan_findings(&tax));
    findings.extend(naming_findings(&tax, &schema));
    findings.extend(validate_domain_range(graph, &tax, &schema));
    LintReport::from_findings(findings)
}
