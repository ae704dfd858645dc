//! Plain-text exchange format for conic problems.
//!
//! ```text
//! conic-problem 1
//! variables <n>
//! rows <m>
//! cones <count>
//! <ZERO|NONNEG|SOC> <dim>        (one line per block, in row order)
//! objective <nnz>
//! <col> <value>
//! matrix <nnz>
//! <row> <col> <value>             (COO triplets of A)
//! rhs <m>
//! <value>
//! ```
//!
//! The problem is `min qᵀx` subject to `b − A x ∈ K`. Indices are zero-based
//! and values are written with 17 significant digits.

use std::fmt::Write as _;

use super::problem::{ConeBlock, ConeKind, ConicProblem};
use super::SocpError;

pub fn write_problem(problem: &ConicProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "conic-problem 1");
    let _ = writeln!(out, "variables {}", problem.num_vars);
    let _ = writeln!(out, "rows {}", problem.num_rows());
    let _ = writeln!(out, "cones {}", problem.cones.len());
    for b in &problem.cones {
        let kind = match b.kind {
            ConeKind::Zero => "ZERO",
            ConeKind::Nonneg => "NONNEG",
            ConeKind::Soc => "SOC",
        };
        let _ = writeln!(out, "{kind} {}", b.dim);
    }
    let _ = writeln!(out, "objective {}", problem.objective.len());
    for &(j, v) in &problem.objective {
        let _ = writeln!(out, "{j} {v:.17e}");
    }
    let _ = writeln!(out, "matrix {}", problem.triplets.len());
    for &(i, j, v) in &problem.triplets {
        let _ = writeln!(out, "{i} {j} {v:.17e}");
    }
    let _ = writeln!(out, "rhs {}", problem.rhs.len());
    for v in &problem.rhs {
        let _ = writeln!(out, "{v:.17e}");
    }
    out
}

struct Lines<'a> {
    inner: Box<dyn Iterator<Item = (usize, &'a str)> + 'a>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>), SocpError> {
        let (no, line) = self.inner.next().ok_or_else(|| SocpError::Format {
            line: 0,
            reason: format!("unexpected end of input, expected {what}"),
        })?;
        Ok((no + 1, line.split_whitespace().collect()))
    }

    fn header(&mut self, key: &str) -> Result<usize, SocpError> {
        let (no, t) = self.next(key)?;
        if t.len() != 2 || t[0] != key {
            return Err(SocpError::Format {
                line: no,
                reason: format!("expected `{key} <count>`"),
            });
        }
        num(no, t[1])
    }
}

fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, SocpError> {
    s.parse().map_err(|_| SocpError::Format {
        line,
        reason: format!("cannot parse `{s}`"),
    })
}

pub fn read_problem(text: &str) -> Result<ConicProblem, SocpError> {
    let mut lines = Lines {
        inner: Box::new(text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty())),
    };
    let version = lines.header("conic-problem")?;
    if version != 1 {
        return Err(SocpError::Format {
            line: 1,
            reason: format!("unsupported version {version}"),
        });
    }
    let num_vars = lines.header("variables")?;
    let rows = lines.header("rows")?;
    let ncones = lines.header("cones")?;
    let mut cones = Vec::with_capacity(ncones);
    for _ in 0..ncones {
        let (no, t) = lines.next("cone block")?;
        let kind = match t.first().copied() {
            Some("ZERO") => ConeKind::Zero,
            Some("NONNEG") => ConeKind::Nonneg,
            Some("SOC") => ConeKind::Soc,
            _ => {
                return Err(SocpError::Format {
                    line: no,
                    reason: "unknown cone kind".into(),
                })
            }
        };
        let dim = num(no, t.get(1).copied().unwrap_or(""))?;
        cones.push(ConeBlock { kind, dim });
    }
    let nobj = lines.header("objective")?;
    let mut objective = Vec::with_capacity(nobj);
    for _ in 0..nobj {
        let (no, t) = lines.next("objective entry")?;
        if t.len() != 2 {
            return Err(SocpError::Format {
                line: no,
                reason: "expected `<col> <value>`".into(),
            });
        }
        objective.push((num(no, t[0])?, num(no, t[1])?));
    }
    let nnz = lines.header("matrix")?;
    let mut triplets = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let (no, t) = lines.next("matrix entry")?;
        if t.len() != 3 {
            return Err(SocpError::Format {
                line: no,
                reason: "expected `<row> <col> <value>`".into(),
            });
        }
        let (i, j): (usize, usize) = (num(no, t[0])?, num(no, t[1])?);
        if i >= rows || j >= num_vars {
            return Err(SocpError::Format {
                line: no,
                reason: format!("entry ({i}, {j}) outside {rows}×{num_vars}"),
            });
        }
        triplets.push((i, j, num(no, t[2])?));
    }
    let nrhs = lines.header("rhs")?;
    let mut rhs = Vec::with_capacity(nrhs);
    for _ in 0..nrhs {
        let (no, t) = lines.next("rhs entry")?;
        rhs.push(num(no, t.first().copied().unwrap_or(""))?);
    }
    if rhs.len() != rows || cones.iter().map(|b| b.dim).sum::<usize>() != rows {
        return Err(SocpError::Format {
            line: 0,
            reason: "cone dimensions and rhs length must equal the row count".into(),
        });
    }
    Ok(ConicProblem {
        objective,
        triplets,
        rhs,
        cones,
        num_vars,
        index: None,
    })
}
