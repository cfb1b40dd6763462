//! Plain-text instance file format.
//!
//! ```text
//! [datacenters]
//! # id type capacity_gb region [cost_multiplier]
//! 0 cloud inf 0
//! 1 edge 10 0 1.5
//!
//! [bandwidth]
//! # MB/s, row-major, diagonal ignored
//! 0 20
//! 20 0
//!
//! [datasets]
//! # id size_gb pf sf lg home cost
//! 0 3.1 0 0 0 - 0.21
//!
//! [workflow 0]
//! region 0
//! task 0 in 0 out - [at 1]
//! edge 0 1
//! ```
//!
//! Ids are dense and zero-based. `-` stands for "none" (no home, empty list).
//! Lines starting with `#` and blank lines are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::model::{
    validate_instance, Capacity, Datacenter, Dataset, DcType, Environment, ModelError,
    ProblemInstance, Task, Workflow,
};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        msg: msg.into(),
    }
}

enum Section {
    None,
    Datacenters,
    Bandwidth,
    Datasets,
    Workflow(usize),
}

struct RawWorkflow {
    region: Option<usize>,
    tasks: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

fn num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, FormatError> {
    tok.parse()
        .map_err(|_| syntax(line, format!("invalid {what} `{tok}`")))
}

fn flag(tok: &str, line: usize, what: &str) -> Result<bool, FormatError> {
    match tok {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(syntax(
            line,
            format!("{what} flag must be 0 or 1, got `{tok}`"),
        )),
    }
}

fn id_list(tok: &str, line: usize) -> Result<Vec<usize>, FormatError> {
    if tok == "-" {
        return Ok(Vec::new());
    }
    tok.split(',').map(|t| num(t, line, "dataset id")).collect()
}

fn expect_id(got: usize, expected: usize, line: usize, what: &str) -> Result<(), FormatError> {
    if got != expected {
        return Err(syntax(
            line,
            format!("{what} ids must be dense and ordered: expected {expected}, got {got}"),
        ));
    }
    Ok(())
}

/// Parses and validates an instance.
pub fn parse_instance(text: &str) -> Result<ProblemInstance, FormatError> {
    let mut section = Section::None;
    let mut datacenters = Vec::new();
    let mut bandwidth: Vec<Vec<f64>> = Vec::new();
    let mut datasets = Vec::new();
    let mut workflows: Vec<RawWorkflow> = Vec::new();
    let mut tasks: Vec<Task> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(header) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let mut parts = header.split_whitespace();
            section = match (parts.next(), parts.next()) {
                (Some("datacenters"), None) => Section::Datacenters,
                (Some("bandwidth"), None) => Section::Bandwidth,
                (Some("datasets"), None) => Section::Datasets,
                (Some("workflow"), Some(id)) => {
                    let id: usize = num(id, line, "workflow id")?;
                    expect_id(id, workflows.len(), line, "workflow")?;
                    workflows.push(RawWorkflow {
                        region: None,
                        tasks: Vec::new(),
                        edges: Vec::new(),
                    });
                    Section::Workflow(id)
                }
                _ => return Err(syntax(line, format!("unknown section [{header}]"))),
            };
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        match section {
            Section::None => return Err(syntax(line, "content before the first section")),
            Section::Datacenters => {
                if !(4..=5).contains(&toks.len()) {
                    return Err(syntax(
                        line,
                        "expected: id type capacity_gb region [cost_multiplier]",
                    ));
                }
                let id: usize = num(toks[0], line, "datacenter id")?;
                expect_id(id, datacenters.len(), line, "datacenter")?;
                let dc_type = match toks[1] {
                    "cloud" | "0" => DcType::Cloud,
                    "edge" | "1" => DcType::Edge,
                    other => {
                        return Err(syntax(line, format!("unknown datacenter type `{other}`")))
                    }
                };
                let capacity = match toks[2] {
                    "inf" | "unbounded" => Capacity::Unbounded,
                    t => Capacity::Gb(num(t, line, "capacity")?),
                };
                let region = num(toks[3], line, "region")?;
                let cost_multiplier = match toks.get(4) {
                    Some(t) => num(t, line, "cost multiplier")?,
                    None => 1.0,
                };
                datacenters.push(Datacenter {
                    id,
                    dc_type,
                    capacity,
                    region,
                    cost_multiplier,
                });
            }
            Section::Bandwidth => {
                let row = toks
                    .iter()
                    .map(|t| num(t, line, "bandwidth"))
                    .collect::<Result<Vec<f64>, _>>()?;
                bandwidth.push(row);
            }
            Section::Datasets => {
                if toks.len() != 7 {
                    return Err(syntax(line, "expected: id size_gb pf sf lg home cost"));
                }
                let id: usize = num(toks[0], line, "dataset id")?;
                expect_id(id, datasets.len(), line, "dataset")?;
                let home = match toks[5] {
                    "-" => None,
                    t => Some(num(t, line, "home datacenter")?),
                };
                datasets.push(Dataset {
                    id,
                    size_gb: num(toks[1], line, "size")?,
                    private: flag(toks[2], line, "pf")?,
                    shared: flag(toks[3], line, "sf")?,
                    cross_region: flag(toks[4], line, "lg")?,
                    home,
                    cost: num(toks[6], line, "cost")?,
                });
            }
            Section::Workflow(w) => {
                let wf = &mut workflows[w];
                match toks.as_slice() {
                    ["region", r] => wf.region = Some(num(r, line, "region")?),
                    ["edge", a, b] => wf
                        .edges
                        .push((num(a, line, "task id")?, num(b, line, "task id")?)),
                    ["task", id, "in", ins, "out", outs, rest @ ..] => {
                        let id: usize = num(id, line, "task id")?;
                        expect_id(id, tasks.len(), line, "task")?;
                        let placed_at = match rest {
                            [] => None,
                            ["at", dc] => Some(num(dc, line, "datacenter id")?),
                            _ => return Err(syntax(line, "trailing tokens after task")),
                        };
                        wf.tasks.push(id);
                        tasks.push(Task {
                            id,
                            workflow: w,
                            inputs: id_list(ins, line)?,
                            outputs: id_list(outs, line)?,
                            placed_at,
                        });
                    }
                    _ => return Err(syntax(line, "expected `region`, `task` or `edge` line")),
                }
            }
        }
    }

    let workflows = workflows
        .into_iter()
        .enumerate()
        .map(|(id, raw)| {
            Ok(Workflow {
                id,
                region: raw
                    .region
                    .ok_or_else(|| syntax(0, format!("workflow {id} has no region line")))?,
                tasks: raw.tasks,
                edges: raw.edges,
            })
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    let env = Environment {
        datacenters,
        bandwidth,
    };
    Ok(validate_instance(env, workflows, tasks, datasets)?)
}

fn join_ids(ids: &[usize]) -> String {
    if ids.is_empty() {
        "-".to_string()
    } else {
        ids.iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Writes an instance in the text format. `parse_instance(&write_instance(i))`
/// reproduces `i` exactly.
pub fn write_instance(instance: &ProblemInstance) -> String {
    let mut out = String::new();
    let env = instance.env();
    out.push_str("[datacenters]\n# id type capacity_gb region cost_multiplier\n");
    for dc in &env.datacenters {
        let cap = match dc.capacity {
            Capacity::Unbounded => "inf".to_string(),
            Capacity::Gb(c) => c.to_string(),
        };
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            dc.id, dc.dc_type, cap, dc.region, dc.cost_multiplier
        );
    }
    out.push_str("\n[bandwidth]\n# MB/s\n");
    for row in &env.bandwidth {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    out.push_str("\n[datasets]\n# id size_gb pf sf lg home cost\n");
    for d in instance.datasets() {
        let home = d.home.map_or_else(|| "-".to_string(), |h| h.to_string());
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {}",
            d.id,
            d.size_gb,
            u8::from(d.private),
            u8::from(d.shared),
            u8::from(d.cross_region),
            home,
            d.cost
        );
    }
    for wf in instance.workflows() {
        let _ = write!(out, "\n[workflow {}]\nregion {}\n", wf.id, wf.region);
        for &t in &wf.tasks {
            let task = &instance.tasks()[t];
            let _ = write!(
                out,
                "task {} in {} out {}",
                task.id,
                join_ids(&task.inputs),
                join_ids(&task.outputs)
            );
            if let Some(dc) = task.placed_at {
                let _ = write!(out, " at {dc}");
            }
            out.push('\n');
        }
        for &(a, b) in &wf.edges {
            let _ = writeln!(out, "edge {a} {b}");
        }
    }
    out
}

pub fn load_instance(path: &Path) -> Result<ProblemInstance, FormatError> {
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_instance(&text)
}

pub fn save_instance(instance: &ProblemInstance, path: &Path) -> Result<(), FormatError> {
    fs::write(path, write_instance(instance)).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
[datacenters]
0 cloud inf 0
1 edge 10 0 2
[bandwidth]
0 20
20 0
[datasets]
0 1.5 0 0 0 - 0.3
1 2 1 0 0 1 0.4
[workflow 0]
region 0
task 0 in 0,1 out - at 1
task 1 in 0 out -
edge 0 1
";

    #[test]
    fn parses_small_instance() {
        let inst = parse_instance(SMALL).unwrap();
        assert_eq!(inst.dc_count(), 2);
        assert_eq!(inst.env().datacenters[1].cost_multiplier, 2.0);
        assert_eq!(inst.datasets()[1].home, Some(1));
        assert_eq!(inst.tasks()[0].inputs, vec![0, 1]);
        assert_eq!(inst.tasks()[0].placed_at, Some(1));
        assert_eq!(inst.workflows()[0].edges, vec![(0, 1)]);
        assert!((inst.cost_rate(0, 1) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn write_then_parse_is_identity() {
        let inst = parse_instance(SMALL).unwrap();
        let again = parse_instance(&write_instance(&inst)).unwrap();
        assert_eq!(inst, again);
    }

    #[test]
    fn reports_line_of_syntax_error() {
        let bad = SMALL.replace("0 1.5 0 0 0 - 0.3", "0 1.5 0 2 0 - 0.3");
        match parse_instance(&bad) {
            Err(FormatError::Syntax { line, .. }) => assert_eq!(line, 8),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cyclic_edges_surface_model_error() {
        let bad = format!("{SMALL}edge 1 0\n");
        let err = parse_instance(&bad).unwrap_err();
        assert!(err.to_string().contains("CyclicWorkflow"), "{err}");
    }

    #[test]
    fn finite_cloud_capacity_rejected() {
        let bad = SMALL.replace("0 cloud inf 0", "0 cloud 100 0");
        assert!(matches!(
            parse_instance(&bad),
            Err(FormatError::Model(ModelError::InvalidDatacenter { .. }))
        ));
    }
}
