//! The line-oriented instance file format.
//!
//! ```text
//! NFOLD
//! LOCALS 3
//! LINKROWS 1
//! LOCALROWS 2
//! C
//! 0 0 1
//! a 8
//! BRICK x2
//! D
//! 1 1 0
//! -3 0 1
//! b 1 0
//! c 0 0 0
//! ENDBRICK
//! END
//! ```
//!
//! The header is `TWOSTAGE`, `NFOLD` or `FOURBLOCK`. Dimension lines follow.
//! A matrix is a keyword line (`A`, `D`, `C`, `Bmat`) followed by one line per
//! row. A vector is its keyword followed by the entries on the same line.
//! `#` starts a comment and blank lines are ignored. A matrix with zero
//! columns has no row lines.
//!
//! Program-level blocks: `C` and `a` for n-fold; `Bmat`, `C`, `A` and `a` for
//! 4-block. Brick blocks: `A`, `D`, `b` for two-stage; `D`, `b`, `c` for
//! n-fold; `D`, `b` and optional overrides `C`, `A` for 4-block. `BRICK xM`
//! repeats a brick `M` times; n-fold keeps it as a multiplicity.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::model::{
    FourBlockGroup, FourBlockProgram, NFoldBrick, NFoldProgram, NFoldSolution, TwoStageBrick, TwoStageProgram,
    TwoStageWitness,
};
use crate::numerics::{IntMat, IntVec, Index};

/// Any program the format describes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    TwoStage(TwoStageProgram),
    NFold(NFoldProgram),
    FourBlock(FourBlockProgram),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    TwoStage,
    NFold,
    FourBlock,
}

struct Line<'a> {
    number: usize,
    /// Tokens with their 1-based columns.
    tokens: Vec<(usize, &'a str)>,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (pos, ch) in content.char_indices() {
            if ch.is_whitespace() {
                if let Some(s) = start.take() {
                    tokens.push((s + 1, &content[s..pos]));
                }
            } else if start.is_none() {
                start = Some(pos);
            }
        }
        if let Some(s) = start {
            tokens.push((s + 1, &content[s..]));
        }
        if !tokens.is_empty() {
            out.push(Line { number: i + 1, tokens });
        }
    }
    out
}

fn parse_int(line: usize, (col, tok): (usize, &str)) -> Result<BigInt> {
    let digits = tok.strip_prefix('-').unwrap_or(tok);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(line, col, format!("expected an integer, found `{tok}`")));
    }
    tok.parse().map_err(|_| err(line, col, format!("expected an integer, found `{tok}`")))
}

fn parse_count(line: usize, (col, tok): (usize, &str)) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| err(line, col, format!("expected a nonnegative count, found `{tok}`")))
}

struct Parser<'a> {
    lines: Vec<Line<'a>>,
    pos: usize,
    last_line: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Line<'a>> {
        self.lines.get(self.pos)
    }

    fn next(&mut self) -> Result<&Line<'a>> {
        let line = self
            .lines
            .get(self.pos)
            .ok_or_else(|| err(self.last_line + 1, 1, "unexpected end of input"))?;
        self.pos += 1;
        Ok(line)
    }

    fn keyword(&self) -> Option<&'a str> {
        self.peek().map(|l| l.tokens[0].1)
    }

    /// Entries of a vector line `kw e1 e2 ...` of the given length.
    fn vector(&mut self, len: usize) -> Result<Vec<BigInt>> {
        let line = self.next()?;
        let (n, toks) = (line.number, &line.tokens[1..]);
        if toks.len() != len {
            let col = toks.get(len).map_or(line.tokens[0].0, |t| t.0);
            return Err(err(n, col, format!("`{}` needs {len} entries, found {}", line.tokens[0].1, toks.len())));
        }
        toks.iter().map(|&t| parse_int(n, t)).collect()
    }

    /// A matrix block: the keyword line, then `rows` lines of `cols` integers.
    fn matrix(&mut self, rows: usize, cols: usize) -> Result<Vec<Vec<BigInt>>> {
        let head = self.next()?;
        if let Some(&(col, tok)) = head.tokens.get(1) {
            return Err(err(head.number, col, format!("unexpected `{tok}` after a matrix keyword")));
        }
        let name = head.tokens[0].1;
        if cols == 0 {
            return Ok(vec![Vec::new(); rows]);
        }
        let mut out = Vec::with_capacity(rows);
        for r in 0..rows {
            let line = self.next()?;
            if line.tokens.len() != cols {
                let col = line.tokens.get(cols).map_or(line.tokens[0].0, |t| t.0);
                return Err(err(
                    line.number,
                    col,
                    format!("row {} of `{name}` needs {cols} entries, found {}", r + 1, line.tokens.len()),
                ));
            }
            out.push(line.tokens.iter().map(|&t| parse_int(line.number, t)).collect::<Result<Vec<_>>>()?);
        }
        Ok(out)
    }
}

struct Dims {
    globals: usize,
    locals: usize,
    link_rows: usize,
    local_rows: usize,
}

fn required(kind: Kind) -> &'static [&'static str] {
    match kind {
        Kind::TwoStage => &["GLOBALS", "LOCALS", "LOCALROWS"],
        Kind::NFold => &["LOCALS", "LINKROWS", "LOCALROWS"],
        Kind::FourBlock => &["GLOBALS", "LOCALS", "LINKROWS", "LOCALROWS"],
    }
}

/// Parses one program; errors carry the line and column of the offending token.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let lines = lex(text);
    let last_line = text.lines().count();
    let mut p = Parser { lines, pos: 0, last_line };
    let head = p.next()?;
    let kind = match head.tokens[0].1 {
        "TWOSTAGE" => Kind::TwoStage,
        "NFOLD" => Kind::NFold,
        "FOURBLOCK" => Kind::FourBlock,
        other => {
            return Err(err(head.number, head.tokens[0].0, format!("expected TWOSTAGE, NFOLD or FOURBLOCK, found `{other}`")))
        }
    };
    if let Some(&(col, tok)) = head.tokens.get(1) {
        return Err(err(head.number, col, format!("unexpected `{tok}` after the header")));
    }
    let mut dims: HashMap<&str, usize> = HashMap::new();
    while let Some(kw) = p.keyword() {
        if !["GLOBALS", "LOCALS", "LINKROWS", "LOCALROWS"].contains(&kw) {
            break;
        }
        let line = p.next()?;
        if !required(kind).contains(&kw) {
            return Err(err(line.number, line.tokens[0].0, format!("`{kw}` does not apply to this program kind")));
        }
        if dims.contains_key(kw) {
            return Err(err(line.number, line.tokens[0].0, format!("`{kw}` given twice")));
        }
        if line.tokens.len() != 2 {
            return Err(err(line.number, line.tokens[0].0, format!("`{kw}` takes exactly one number")));
        }
        dims.insert(kw, parse_count(line.number, line.tokens[1])?);
    }
    for kw in required(kind) {
        if !dims.contains_key(kw) {
            let (n, c) = p.peek().map_or((last_line + 1, 1), |l| (l.number, l.tokens[0].0));
            return Err(err(n, c, format!("missing dimension line `{kw}`")));
        }
    }
    let d = Dims {
        globals: dims.get("GLOBALS").copied().unwrap_or(0),
        locals: dims["LOCALS"],
        link_rows: dims.get("LINKROWS").copied().unwrap_or(0),
        local_rows: dims["LOCALROWS"],
    };
    let inst = match kind {
        Kind::TwoStage => parse_twostage(&mut p, &d)?,
        Kind::NFold => parse_nfold(&mut p, &d)?,
        Kind::FourBlock => parse_fourblock(&mut p, &d)?,
    };
    let end = p.next()?;
    if end.tokens[0].1 != "END" || end.tokens.len() != 1 {
        return Err(err(end.number, end.tokens[0].0, format!("expected END, found `{}`", end.tokens[0].1)));
    }
    if let Some(extra) = p.peek() {
        return Err(err(extra.number, extra.tokens[0].0, "content after END"));
    }
    Ok(inst)
}

/// Blocks of one kind-specific section, each at most once, until `stop`.
fn blocks<'a>(
    p: &mut Parser<'a>,
    allowed: &[(&str, bool)],
    stop: &[&str],
    mut read: impl FnMut(&mut Parser<'a>, &str) -> Result<()>,
) -> Result<()> {
    let mut seen: Vec<&str> = Vec::new();
    let mut last = (p.last_line + 1, 1);
    while let Some(line) = p.peek() {
        let (n, c, kw) = (line.number, line.tokens[0].0, line.tokens[0].1);
        last = (n, c);
        if stop.contains(&kw) {
            break;
        }
        let Some(&(name, _)) = allowed.iter().find(|(k, _)| *k == kw) else {
            return Err(err(n, c, format!("unexpected `{kw}` here")));
        };
        if seen.contains(&name) {
            return Err(err(n, c, format!("`{kw}` given twice")));
        }
        seen.push(name);
        read(p, name)?;
    }
    for (name, needed) in allowed {
        if *needed && !seen.contains(name) {
            return Err(err(last.0, last.1, format!("missing `{name}` block")));
        }
    }
    Ok(())
}

/// `BRICK [xM]`; returns `M`.
fn brick_header(p: &mut Parser<'_>) -> Result<usize> {
    let line = p.next()?;
    let n = line.number;
    match line.tokens.as_slice() {
        [(_, "BRICK")] => Ok(1),
        [(_, "BRICK"), (col, m)] => match m.strip_prefix('x').and_then(|s| s.parse::<usize>().ok()) {
            Some(k) if k >= 1 => Ok(k),
            _ => Err(err(n, *col, format!("expected a multiplicity `xM` with M ≥ 1, found `{m}`"))),
        },
        [(col, "BRICK"), ..] => Err(err(n, *col, "BRICK takes at most one multiplicity")),
        [(col, kw), ..] => Err(err(n, *col, format!("expected BRICK or END, found `{kw}`"))),
        [] => unreachable!("lexed lines are nonempty"),
    }
}

fn end_brick(p: &mut Parser<'_>) -> Result<()> {
    let line = p.next()?;
    if line.tokens[0].1 != "ENDBRICK" || line.tokens.len() != 1 {
        return Err(err(line.number, line.tokens[0].0, format!("expected ENDBRICK, found `{}`", line.tokens[0].1)));
    }
    Ok(())
}

fn is_brick(p: &Parser<'_>) -> bool {
    p.keyword() == Some("BRICK")
}

fn reject_cost(p: &Parser<'_>) -> Result<()> {
    if let Some(line) = p.peek() {
        if line.tokens[0].1 == "c" {
            return Err(err(line.number, line.tokens[0].0, "two-stage bricks have no cost vector"));
        }
    }
    Ok(())
}

fn parse_twostage(p: &mut Parser<'_>, d: &Dims) -> Result<Instance> {
    let (globals, locals, rows) = (Index::range("x", d.globals), Index::range("y", d.locals), Index::range("t", d.local_rows));
    let mut bricks = Vec::new();
    while is_brick(p) {
        let m = brick_header(p)?;
        let (mut a, mut dm, mut b) = (None, None, None);
        blocks(p, &[("A", true), ("D", true), ("b", true)], &["ENDBRICK"], |p, kw| {
            reject_cost(p)?;
            match kw {
                "A" => a = Some(p.matrix(d.local_rows, d.globals)?),
                "D" => dm = Some(p.matrix(d.local_rows, d.locals)?),
                _ => b = Some(p.vector(d.local_rows)?),
            }
            Ok(())
        })
        .or_else(|e| reject_cost(p).and(Err(e)))?;
        end_brick(p)?;
        let brick = TwoStageBrick {
            a: IntMat::new(rows.clone(), globals.clone(), a.expect("required"))?,
            d: IntMat::new(rows.clone(), locals.clone(), dm.expect("required"))?,
            b: IntVec::new(rows.clone(), b.expect("required"))?,
        };
        bricks.extend(std::iter::repeat_n(brick, m));
    }
    Ok(Instance::TwoStage(TwoStageProgram::new(globals, locals, rows, bricks)?))
}

fn parse_nfold(p: &mut Parser<'_>, d: &Dims) -> Result<Instance> {
    let (locals, link, rows) = (Index::range("y", d.locals), Index::range("s", d.link_rows), Index::range("t", d.local_rows));
    let (mut c, mut a) = (None, None);
    blocks(p, &[("C", true), ("a", true)], &["BRICK", "END"], |p, kw| {
        match kw {
            "C" => c = Some(p.matrix(d.link_rows, d.locals)?),
            _ => a = Some(p.vector(d.link_rows)?),
        }
        Ok(())
    })?;
    let mut bricks = Vec::new();
    while is_brick(p) {
        let m = brick_header(p)?;
        let (mut dm, mut b, mut cost) = (None, None, None);
        blocks(p, &[("D", true), ("b", true), ("c", true)], &["ENDBRICK"], |p, kw| {
            match kw {
                "D" => dm = Some(p.matrix(d.local_rows, d.locals)?),
                "b" => b = Some(p.vector(d.local_rows)?),
                _ => cost = Some(p.vector(d.locals)?),
            }
            Ok(())
        })?;
        end_brick(p)?;
        bricks.push(NFoldBrick {
            d: IntMat::new(rows.clone(), locals.clone(), dm.expect("required"))?,
            b: IntVec::new(rows.clone(), b.expect("required"))?,
            c: IntVec::new(locals.clone(), cost.expect("required"))?,
            multiplicity: m,
        });
    }
    let cm = IntMat::new(link.clone(), locals, c.expect("required"))?;
    Ok(Instance::NFold(NFoldProgram::new(cm, IntVec::new(link, a.expect("required"))?, rows, bricks)?))
}

fn parse_fourblock(p: &mut Parser<'_>, d: &Dims) -> Result<Instance> {
    let globals = Index::range("x", d.globals);
    let locals = Index::range("y", d.locals);
    let link = Index::range("s", d.link_rows);
    let rows = Index::range("t", d.local_rows);
    let (mut bm, mut c, mut a, mut rhs) = (None, None, None, None);
    blocks(p, &[("Bmat", true), ("C", true), ("A", true), ("a", true)], &["BRICK", "END"], |p, kw| {
        match kw {
            "Bmat" => bm = Some(p.matrix(d.link_rows, d.globals)?),
            "C" => c = Some(p.matrix(d.link_rows, d.locals)?),
            "A" => a = Some(p.matrix(d.local_rows, d.globals)?),
            _ => rhs = Some(p.vector(d.link_rows)?),
        }
        Ok(())
    })?;
    let mut groups = Vec::new();
    while is_brick(p) {
        let m = brick_header(p)?;
        let (mut gc, mut ga, mut dm, mut b) = (None, None, None, None);
        blocks(p, &[("C", false), ("A", false), ("D", true), ("b", true)], &["ENDBRICK"], |p, kw| {
            match kw {
                "C" => gc = Some(p.matrix(d.link_rows, d.locals)?),
                "A" => ga = Some(p.matrix(d.local_rows, d.globals)?),
                "D" => dm = Some(p.matrix(d.local_rows, d.locals)?),
                _ => b = Some(p.vector(d.local_rows)?),
            }
            Ok(())
        })?;
        end_brick(p)?;
        let group = FourBlockGroup {
            c: gc.map(|m| IntMat::new(link.clone(), locals.clone(), m)).transpose()?,
            a: ga.map(|m| IntMat::new(rows.clone(), globals.clone(), m)).transpose()?,
            d: IntMat::new(rows.clone(), locals.clone(), dm.expect("required"))?,
            b: IntVec::new(rows.clone(), b.expect("required"))?,
        };
        groups.extend(std::iter::repeat_n(group, m));
    }
    let prog = FourBlockProgram {
        bmat: IntMat::new(link.clone(), globals.clone(), bm.expect("required"))?,
        c: IntMat::new(link.clone(), locals.clone(), c.expect("required"))?,
        a: IntMat::new(rows.clone(), globals.clone(), a.expect("required"))?,
        rhs: IntVec::new(link.clone(), rhs.expect("required"))?,
        globals,
        locals,
        link_rows: link,
        local_rows: rows,
        groups,
    };
    prog.validate()?;
    Ok(Instance::FourBlock(prog))
}

/// `kw e1 e2 ...` on one line.
pub fn format_vector(kw: &str, v: &[BigInt]) -> String {
    let mut s = kw.to_string();
    for x in v {
        let _ = write!(s, " {x}");
    }
    s.push('\n');
    s
}

fn format_matrix(out: &mut String, kw: &str, m: &IntMat) {
    out.push_str(kw);
    out.push('\n');
    if m.ncols() == 0 {
        return;
    }
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
}

fn brick_line(m: usize) -> String {
    if m == 1 {
        "BRICK\n".to_string()
    } else {
        format!("BRICK x{m}\n")
    }
}

/// Canonical text of a program: no comments, dimension lines in a fixed
/// order, bricks in program order.
pub fn format_instance(inst: &Instance) -> String {
    let mut out = String::new();
    match inst {
        Instance::TwoStage(p) => {
            let _ = write!(out, "TWOSTAGE\nGLOBALS {}\nLOCALS {}\nLOCALROWS {}\n", p.globals.len(), p.locals.len(), p.rows.len());
            for br in &p.bricks {
                out.push_str(&brick_line(1));
                format_matrix(&mut out, "A", &br.a);
                format_matrix(&mut out, "D", &br.d);
                out.push_str(&format_vector("b", br.b.entries()));
                out.push_str("ENDBRICK\n");
            }
        }
        Instance::NFold(p) => {
            let _ = write!(
                out,
                "NFOLD\nLOCALS {}\nLINKROWS {}\nLOCALROWS {}\n",
                p.locals.len(),
                p.link_rows.len(),
                p.local_rows.len()
            );
            format_matrix(&mut out, "C", &p.c);
            out.push_str(&format_vector("a", p.a.entries()));
            for br in &p.bricks {
                out.push_str(&brick_line(br.multiplicity));
                format_matrix(&mut out, "D", &br.d);
                out.push_str(&format_vector("b", br.b.entries()));
                out.push_str(&format_vector("c", br.c.entries()));
                out.push_str("ENDBRICK\n");
            }
        }
        Instance::FourBlock(p) => {
            let _ = write!(
                out,
                "FOURBLOCK\nGLOBALS {}\nLOCALS {}\nLINKROWS {}\nLOCALROWS {}\n",
                p.globals.len(),
                p.locals.len(),
                p.link_rows.len(),
                p.local_rows.len()
            );
            format_matrix(&mut out, "Bmat", &p.bmat);
            format_matrix(&mut out, "C", &p.c);
            format_matrix(&mut out, "A", &p.a);
            out.push_str(&format_vector("a", p.rhs.entries()));
            for g in &p.groups {
                out.push_str(&brick_line(1));
                if let Some(c) = &g.c {
                    format_matrix(&mut out, "C", c);
                }
                if let Some(a) = &g.a {
                    format_matrix(&mut out, "A", a);
                }
                format_matrix(&mut out, "D", &g.d);
                out.push_str(&format_vector("b", g.b.entries()));
                out.push_str("ENDBRICK\n");
            }
        }
    }
    out.push_str("END\n");
    out
}

/// `x ...` followed by one `BRICK`/`y`/`ENDBRICK` block per brick.
pub fn format_twostage_witness(w: &TwoStageWitness) -> String {
    let mut out = format_vector("x", w.u.entries());
    for v in &w.v {
        out.push_str(&brick_line(1));
        out.push_str(&format_vector("y", v.entries()));
        out.push_str("ENDBRICK\n");
    }
    out
}

/// One `BRICK xM`/`y`/`ENDBRICK` block per distinct brick solution, in brick order.
pub fn format_nfold_solution(s: &NFoldSolution) -> String {
    let mut out = String::new();
    for groups in &s.bricks {
        for (y, k) in groups {
            out.push_str(&brick_line(*k));
            out.push_str(&format_vector("y", y.entries()));
            out.push_str("ENDBRICK\n");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reductions::{gen_3sat, gen_subset_sum};
    use crate::model::CnfFormula;

    const NFOLD: &str = "NFOLD\n# subset sum\nLOCALS 3\nLINKROWS 1\nLOCALROWS 2\nC\n0 0 1\na 8\nBRICK x5\nD\n1 1 0\n-3 0 1\nb 1 0\nc 0 0 0\nENDBRICK\nEND\n";

    #[test]
    fn nfold_multiplicity_is_kept() {
        let Instance::NFold(p) = parse_instance(NFOLD).unwrap() else { panic!("wrong kind") };
        assert_eq!(p.bricks.len(), 1);
        assert_eq!(p.bricks[0].multiplicity, 5);
    }

    #[test]
    fn round_trips_are_byte_stable() {
        let f = CnfFormula::new(3, vec![[1, 2, -3], [-1, 2, 3]]).unwrap();
        for inst in [
            Instance::TwoStage(gen_3sat(&f)),
            Instance::NFold(gen_subset_sum(&[3, 5, 7], 8, Some(&[1, -2, 3])).unwrap()),
            parse_instance(NFOLD).unwrap(),
        ] {
            let text = format_instance(&inst);
            let again = parse_instance(&text).unwrap();
            assert_eq!(format_instance(&again), text);
        }
    }

    #[test]
    fn errors_name_the_line_and_column() {
        let bad = NFOLD.replace("-3 0 1", "-3 0");
        match parse_instance(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 12),
            other => panic!("unexpected {other:?}"),
        }
        let bad = NFOLD.replace("a 8", "a 8x");
        assert!(matches!(parse_instance(&bad), Err(Error::Parse { line: 8, column: 3, .. })));
        let two = "TWOSTAGE\nGLOBALS 1\nLOCALS 1\nLOCALROWS 1\nBRICK\nA\n1\nD\n2\nb 3\nc 1\nENDBRICK\nEND\n";
        assert!(matches!(parse_instance(two), Err(Error::Parse { line: 11, .. })));
        assert!(matches!(parse_instance("NFOLD\nLOCALS 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_instance(&NFOLD.replace("END\n", "END\nBRICK\n")), Err(Error::Parse { .. })));
    }

    #[test]
    fn zero_width_matrices_have_no_rows() {
        let text = "TWOSTAGE\nGLOBALS 0\nLOCALS 1\nLOCALROWS 1\nBRICK\nA\nD\n2\nb 4\nENDBRICK\nEND\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(format_instance(&inst), text);
    }
}
