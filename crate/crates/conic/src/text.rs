//! Plain-text dump of a [`ConicProgram`] and of a solution.
//!
//! ```text
//! formguide-conic-program v1
//! name <text>
//! vars <n>
//! cost <j> <c>                         (nonzero entries only)
//! quad <j> <q>
//! bound <j> <lower> <upper>            (non-default bounds only)
//! eq <rhs> <k> <j₁> <a₁> … <j_k> <a_k>      Σ a·x = rhs
//! le <rhs> <k> <j₁> <a₁> …                  Σ a·x ≤ rhs
//! soc var <j> <k> <t₁> … <t_k>              ‖x[t]‖ ≤ x[j]
//! soc const <h> <k> <t₁> … <t_k>            ‖x[t]‖ ≤ h
//! end
//! ```
//!
//! Numbers are written in shortest round-trip form so parsing recovers every
//! value bit for bit. Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use crate::backend::SolveStatus;
use crate::error::ParseError;
use crate::program::{ConeHead, ConicProgram, LinearRow};

pub const FORMAT_HEADER: &str = "formguide-conic-program v1";
pub const SOLUTION_HEADER: &str = "formguide-conic-solution v1";

/// Shortest round-trip decimal, switching to exponent form for very large or small magnitudes.
struct Num(f64);

impl std::fmt::Display for Num {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let a = self.0.abs();
        if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
            write!(f, "{}", self.0)
        } else {
            write!(f, "{:e}", self.0)
        }
    }
}

pub fn write_program(p: &ConicProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{FORMAT_HEADER}");
    let _ = writeln!(out, "name {}", p.name.replace('\n', " "));
    let _ = writeln!(out, "vars {}", p.num_vars());
    for (j, c) in p.cost.iter().enumerate() {
        if *c != 0.0 || c.is_sign_negative() {
            let _ = writeln!(out, "cost {j} {}", Num(*c));
        }
    }
    for (j, q) in &p.quadratic_cost {
        let _ = writeln!(out, "quad {j} {}", Num(*q));
    }
    for j in 0..p.num_vars() {
        let (l, u) = (p.lower[j], p.upper[j]);
        if l != f64::NEG_INFINITY || u != f64::INFINITY {
            let _ = writeln!(out, "bound {j} {} {}", Num(l), Num(u));
        }
    }
    let row = |out: &mut String, tag: &str, r: &LinearRow| {
        let _ = write!(out, "{tag} {} {}", Num(r.rhs), r.entries.len());
        for (j, a) in &r.entries {
            let _ = write!(out, " {j} {}", Num(*a));
        }
        out.push('\n');
    };
    for r in &p.equalities {
        row(&mut out, "eq", r);
    }
    for r in &p.inequalities {
        row(&mut out, "le", r);
    }
    for c in &p.cones {
        match c.head {
            ConeHead::Variable(j) => {
                let _ = write!(out, "soc var {j} {}", c.tail.len());
            }
            ConeHead::Constant(h) => {
                let _ = write!(out, "soc const {} {}", Num(h), c.tail.len());
            }
        }
        for t in &c.tail {
            let _ = write!(out, " {t}");
        }
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

struct Tokens<'a> {
    line: usize,
    it: std::str::SplitWhitespace<'a>,
}

impl<'a> Tokens<'a> {
    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.line, message: message.into() }
    }

    fn word(&mut self, what: &str) -> Result<&'a str, ParseError> {
        self.it.next().ok_or_else(|| self.err(format!("missing {what}")))
    }

    fn float(&mut self, what: &str) -> Result<f64, ParseError> {
        let w = self.word(what)?;
        w.parse().map_err(|_| self.err(format!("bad number {w:?} for {what}")))
    }

    fn index(&mut self, what: &str) -> Result<usize, ParseError> {
        let w = self.word(what)?;
        w.parse().map_err(|_| self.err(format!("bad index {w:?} for {what}")))
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        match self.it.next() {
            Some(w) => Err(self.err(format!("unexpected trailing token {w:?}"))),
            None => Ok(()),
        }
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_program(text: &str) -> Result<ConicProgram, ParseError> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, h)) if h == FORMAT_HEADER => {}
        Some((_, h)) => return Err(ParseError::Header(h.to_string())),
        None => return Err(ParseError::Header(String::new())),
    }
    let mut p: Option<ConicProgram> = None;
    let mut name = String::new();
    let mut ended = false;
    for (line, l) in lines {
        if ended {
            return Err(ParseError::Syntax { line, message: "content after `end`".into() });
        }
        let (tag, rest) = l.split_once(' ').unwrap_or((l, ""));
        if tag == "name" {
            name = rest.to_string();
            continue;
        }
        let mut tk = Tokens { line, it: rest.split_whitespace() };
        if tag == "end" {
            ended = true;
            continue;
        }
        if tag == "vars" {
            let n = tk.index("variable count")?;
            tk.finish()?;
            p = Some(ConicProgram::new(name.clone(), n));
            continue;
        }
        let prog = p.as_mut().ok_or_else(|| tk.err("`vars` must precede constraint data"))?;
        match tag {
            "cost" => {
                let j = tk.index("variable")?;
                let v = tk.float("cost")?;
                *prog.cost.get_mut(j).ok_or_else(|| tk.err("cost index out of range"))? = v;
            }
            "quad" => {
                let j = tk.index("variable")?;
                let q = tk.float("weight")?;
                prog.quadratic_cost.push((j, q));
            }
            "bound" => {
                let j = tk.index("variable")?;
                let l = tk.float("lower bound")?;
                let u = tk.float("upper bound")?;
                if j >= prog.num_vars() {
                    return Err(tk.err("bound index out of range"));
                }
                prog.lower[j] = l;
                prog.upper[j] = u;
            }
            "eq" | "le" => {
                let rhs = tk.float("rhs")?;
                let k = tk.index("entry count")?;
                let mut entries = Vec::with_capacity(k);
                for _ in 0..k {
                    let j = tk.index("variable")?;
                    let a = tk.float("coefficient")?;
                    entries.push((j, a));
                }
                let row = LinearRow::new(entries, rhs);
                if tag == "eq" {
                    prog.equalities.push(row);
                } else {
                    prog.inequalities.push(row);
                }
            }
            "soc" => {
                let head = match tk.word("head kind")? {
                    "var" => ConeHead::Variable(tk.index("head variable")?),
                    "const" => ConeHead::Constant(tk.float("head value")?),
                    other => return Err(tk.err(format!("unknown head kind {other:?}"))),
                };
                let k = tk.index("tail length")?;
                let tail = (0..k).map(|_| tk.index("tail variable")).collect::<Result<_, _>>()?;
                prog.add_cone(head, tail);
            }
            other => return Err(tk.err(format!("unknown record {other:?}"))),
        }
        tk.finish()?;
    }
    if !ended {
        return Err(ParseError::Syntax { line: text.lines().count(), message: "missing `end`".into() });
    }
    let p = p.ok_or_else(|| ParseError::Syntax { line: 0, message: "missing `vars`".into() })?;
    p.validate()?;
    Ok(p)
}

/// Solution record exchanged with external solvers.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionText {
    pub status: SolveStatus,
    pub iterations: usize,
    pub primal: Option<Vec<f64>>,
}

pub fn write_solution(s: &SolutionText) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{SOLUTION_HEADER}");
    let _ = writeln!(out, "status {}", s.status);
    let _ = writeln!(out, "iterations {}", s.iterations);
    if let Some(x) = &s.primal {
        let _ = write!(out, "primal {}", x.len());
        for v in x {
            let _ = write!(out, " {}", Num(*v));
        }
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

pub fn parse_solution(text: &str) -> Result<SolutionText, ParseError> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, h)) if h == SOLUTION_HEADER => {}
        Some((_, h)) => return Err(ParseError::Header(h.to_string())),
        None => return Err(ParseError::Header(String::new())),
    }
    let mut status = None;
    let mut iterations = 0;
    let mut primal = None;
    let mut ended = false;
    for (line, l) in lines {
        let mut tk = Tokens { line, it: l.split_whitespace() };
        match tk.word("record")? {
            "status" => {
                let w = tk.word("status")?;
                status = Some(w.parse::<SolveStatus>().map_err(|e| tk.err(e))?);
            }
            "iterations" => iterations = tk.index("iterations")?,
            "primal" => {
                let k = tk.index("length")?;
                primal = Some((0..k).map(|_| tk.float("value")).collect::<Result<Vec<_>, _>>()?);
            }
            "end" => ended = true,
            other => return Err(tk.err(format!("unknown record {other:?}"))),
        }
        tk.finish()?;
    }
    if !ended {
        return Err(ParseError::Syntax { line: text.lines().count(), message: "missing `end`".into() });
    }
    let status = status.ok_or_else(|| ParseError::Syntax { line: 0, message: "missing `status`".into() })?;
    Ok(SolutionText { status, iterations, primal })
}
