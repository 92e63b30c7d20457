//! Line-oriented field dumps and dense CSV grids.
//!
//! ```text
//! domain box <x0> <x1> <y0> <y1> guard <g>
//! domain cylinder period <a> <b> range <lo> <hi> guard <g>
//! domain graph n <count>
//! ```
//!
//! followed by one `x y value` line per vertex (`id value` for graphs).
//! Lines starting with `#` and blank lines are ignored by the parser.

use std::fmt::Write as _;
use std::sync::Arc;

use super::{IntegerField, Lattice, LatticeKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainHeader {
    Box { x0: i64, x1: i64, y0: i64, y1: i64, guard: i64 },
    Cylinder { period: (i64, i64), lo: i64, hi: i64, guard: i64 },
    Graph { n: usize },
}

impl DomainHeader {
    pub fn of(domain: &Lattice) -> Self {
        match domain.kind() {
            LatticeKind::Box(b) => DomainHeader::Box {
                x0: b.x0,
                x1: b.x1,
                y0: b.y0,
                y1: b.y1,
                guard: b.guard,
            },
            LatticeKind::Cylinder(c) => DomainHeader::Cylinder {
                period: c.period,
                lo: c.lo,
                hi: c.hi,
                guard: c.guard,
            },
            LatticeKind::Graph => DomainHeader::Graph { n: domain.len() },
        }
    }

    /// Rebuilds the domain; graphs cannot be rebuilt from a header alone.
    pub fn build(&self) -> Result<Arc<Lattice>> {
        match *self {
            DomainHeader::Box { x0, x1, y0, y1, guard } => Lattice::boxed(x0, x1, y0, y1, guard),
            DomainHeader::Cylinder { period, lo, hi, guard } => Lattice::cylinder(period, lo, hi, guard),
            DomainHeader::Graph { .. } => Err(Error::NoCoordinates),
        }
    }
}

impl std::fmt::Display for DomainHeader {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DomainHeader::Box { x0, x1, y0, y1, guard } => {
                write!(f, "domain box {x0} {x1} {y0} {y1} guard {guard}")
            }
            DomainHeader::Cylinder { period, lo, hi, guard } => write!(
                f,
                "domain cylinder period {} {} range {lo} {hi} guard {guard}",
                period.0, period.1
            ),
            DomainHeader::Graph { n } => write!(f, "domain graph n {n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDump {
    pub header: DomainHeader,
    /// `(x, y, value)` triples, or `(id, 0, value)` for graphs.
    pub entries: Vec<(i64, i64, i64)>,
}

pub fn write_dump(f: &IntegerField) -> String {
    let domain = f.domain();
    let mut out = String::new();
    writeln!(out, "{}", DomainHeader::of(domain)).unwrap();
    for v in domain.vertices() {
        match domain.coord(v) {
            Some((x, y)) => writeln!(out, "{x} {y} {}", f[v]).unwrap(),
            None => writeln!(out, "{v} {}", f[v]).unwrap(),
        }
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_header(line_no: usize, line: &str) -> Result<DomainHeader> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let int = |i: usize| -> Result<i64> {
        tokens
            .get(i)
            .ok_or_else(|| parse_err(line_no, "truncated header"))?
            .parse::<i64>()
            .map_err(|e| parse_err(line_no, e.to_string()))
    };
    let keyword = |i: usize, k: &str| -> Result<()> {
        if tokens.get(i) == Some(&k) {
            Ok(())
        } else {
            Err(parse_err(line_no, format!("expected `{k}`")))
        }
    };
    keyword(0, "domain")?;
    let header = match tokens.get(1).copied() {
        Some("box") => {
            keyword(6, "guard")?;
            if tokens.len() != 8 {
                return Err(parse_err(line_no, "box header takes 8 tokens"));
            }
            DomainHeader::Box { x0: int(2)?, x1: int(3)?, y0: int(4)?, y1: int(5)?, guard: int(7)? }
        }
        Some("cylinder") => {
            keyword(2, "period")?;
            keyword(5, "range")?;
            keyword(8, "guard")?;
            if tokens.len() != 10 {
                return Err(parse_err(line_no, "cylinder header takes 10 tokens"));
            }
            DomainHeader::Cylinder { period: (int(3)?, int(4)?), lo: int(6)?, hi: int(7)?, guard: int(9)? }
        }
        Some("graph") => {
            keyword(2, "n")?;
            if tokens.len() != 4 {
                return Err(parse_err(line_no, "graph header takes 4 tokens"));
            }
            let n = int(3)?;
            if n < 0 {
                return Err(parse_err(line_no, "negative vertex count"));
            }
            DomainHeader::Graph { n: n as usize }
        }
        _ => return Err(parse_err(line_no, "unknown domain kind")),
    };
    Ok(header)
}

pub fn parse_dump(text: &str) -> Result<FieldDump> {
    let mut header = None;
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some(h) = header else {
            header = Some(parse_header(line_no, line)?);
            continue;
        };
        let nums = line
            .split_whitespace()
            .map(|t| t.parse::<i64>().map_err(|e| parse_err(line_no, e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        match (h, nums.as_slice()) {
            (DomainHeader::Graph { .. }, &[id, value]) => entries.push((id, 0, value)),
            (DomainHeader::Box { .. } | DomainHeader::Cylinder { .. }, &[x, y, value]) => {
                entries.push((x, y, value))
            }
            _ => return Err(parse_err(line_no, "wrong number of fields")),
        }
    }
    let header = header.ok_or_else(|| parse_err(0, "missing domain header"))?;
    Ok(FieldDump { header, entries })
}

/// Parses a dump into a field. Graph dumps need the domain supplied.
pub fn read_field(text: &str, graph_domain: Option<Arc<Lattice>>) -> Result<IntegerField> {
    let dump = parse_dump(text)?;
    let domain = match (dump.header, graph_domain) {
        (DomainHeader::Graph { n }, Some(d)) if d.len() == n && !d.has_coordinates() => d,
        (DomainHeader::Graph { .. }, _) => return Err(Error::DomainMismatch),
        (h, _) => h.build()?,
    };
    let mut values = vec![None; domain.len()];
    for &(a, b, value) in &dump.entries {
        let v = match dump.header {
            DomainHeader::Graph { n } => {
                if a < 0 || a as usize >= n {
                    return Err(parse_err(0, format!("vertex id {a} out of range")));
                }
                a as usize
            }
            _ => {
                let v = domain
                    .vertex_at(a, b)
                    .ok_or_else(|| parse_err(0, format!("point ({a},{b}) outside the domain")))?;
                if domain.coord(v) != Some((a, b)) {
                    return Err(parse_err(0, format!("point ({a},{b}) is not canonical")));
                }
                v
            }
        };
        if values[v].replace(value).is_some() {
            return Err(parse_err(0, format!("vertex {v} listed twice")));
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(v, x)| x.ok_or_else(|| parse_err(0, format!("vertex {v} missing"))))
        .collect::<Result<Vec<_>>>()?;
    IntegerField::new(domain, values)
}

/// Dense grid, top row first, in the layout of [`Lattice::raster`].
pub fn field_to_csv(f: &IntegerField) -> Result<String> {
    let (w, _, ids) = f.domain().raster().ok_or(Error::NoCoordinates)?;
    let mut out = String::new();
    for row in ids.chunks(w) {
        let cells: Vec<String> = row.iter().map(|&v| f[v].to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}
