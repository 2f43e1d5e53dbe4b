//! Balanced systems of linear equations over ℤ and their reductions modulo a
//! prime.
//!
//! Systems are written in the `.lineq` text format: one homogeneous equation
//! per line, terms of the form `[integer]x<index>` with `index >= 1`, `#`
//! comments, blank lines ignored.
//!
//! ```text
//! # W shape
//! x1 - x2 - x3 + x4 = 0
//! x1 - 2x3 + x5 = 0
//! ```

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Position, Result};

/// Largest number of equations accepted in one system.
pub const MAX_EQUATIONS: usize = 64;
/// Largest number of variables accepted in one system.
pub const MAX_VARIABLES: usize = 64;

/// One ℤ-equation `b_1 x_1 + ... + b_r x_r = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ZEquation {
    coeffs: Vec<i64>,
}

impl ZEquation {
    pub fn new(coeffs: Vec<i64>) -> Result<Self> {
        if coeffs.iter().all(|&c| c == 0) {
            return Err(Error::ZeroEquation { line: 0 });
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn coefficient_sum(&self) -> i128 {
        self.coeffs.iter().map(|&c| c as i128).sum()
    }

    pub fn is_balanced(&self) -> bool {
        self.coefficient_sum() == 0
    }

    /// Indices of the variables with a nonzero coefficient.
    pub fn support(&self) -> Vec<usize> {
        support_of(&self.coeffs)
    }
}

fn support_of<T: Copy + Default + PartialEq>(row: &[T]) -> Vec<usize> {
    row.iter()
        .enumerate()
        .filter(|(_, &c)| c != T::default())
        .map(|(i, _)| i)
        .collect()
}

/// A finite system of ℤ-equations in `r` variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ZSystem {
    r: usize,
    equations: Vec<ZEquation>,
    names: Vec<String>,
}

impl ZSystem {
    /// Builds a system from coefficient rows; every row must have length `r`.
    pub fn from_rows(r: usize, rows: Vec<Vec<i64>>) -> Result<Self> {
        let names = (1..=r).map(|i| format!("x{i}")).collect();
        Self::with_names(rows, names)
    }

    /// Builds a system whose variables carry the given display names.
    pub fn with_names(rows: Vec<Vec<i64>>, names: Vec<String>) -> Result<Self> {
        let r = names.len();
        if r > MAX_VARIABLES {
            return Err(Error::TooLarge {
                what: "variable count",
                limit: MAX_VARIABLES,
            });
        }
        if rows.len() > MAX_EQUATIONS {
            return Err(Error::TooLarge {
                what: "equation count",
                limit: MAX_EQUATIONS,
            });
        }
        let mut equations = Vec::with_capacity(rows.len());
        for (l, row) in rows.into_iter().enumerate() {
            if row.len() != r {
                return Err(Error::InvalidArgument(format!(
                    "row {} has {} coefficients, expected {r}",
                    l + 1,
                    row.len()
                )));
            }
            let eq = ZEquation::new(row).map_err(|_| Error::ZeroEquation { line: l + 1 })?;
            equations.push(eq);
        }
        Ok(Self {
            r,
            equations,
            names,
        })
    }

    /// The empty system in `r` variables; `∅(1)` is `ZSystem::empty(1)`.
    pub fn empty(r: usize) -> Self {
        Self {
            r,
            equations: Vec::new(),
            names: (1..=r).map(|i| format!("x{i}")).collect(),
        }
    }

    pub fn empty_with_names(names: Vec<String>) -> Self {
        Self {
            r: names.len(),
            equations: Vec::new(),
            names,
        }
    }

    pub fn variable_count(&self) -> usize {
        self.r
    }

    pub fn equation_count(&self) -> usize {
        self.equations.len()
    }

    pub fn equations(&self) -> &[ZEquation] {
        &self.equations
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.equations.iter().map(|e| e.coeffs.clone()).collect()
    }

    pub fn is_balanced(&self) -> bool {
        self.equations.iter().all(ZEquation::is_balanced)
    }

    /// Fails with the first unbalanced equation (1-based index).
    pub fn require_balanced(&self) -> Result<()> {
        match self.equations.iter().position(|e| !e.is_balanced()) {
            Some(i) => Err(Error::Unbalanced {
                index: i + 1,
                sum: self.equations[i].coefficient_sum(),
            }),
            None => Ok(()),
        }
    }

    pub fn max_abs_coefficient(&self) -> u64 {
        self.equations
            .iter()
            .flat_map(|e| e.coeffs.iter())
            .map(|c| c.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// Variables that appear in no equation (0-based).
    pub fn unused_variables(&self) -> Vec<usize> {
        (0..self.r)
            .filter(|&i| self.equations.iter().all(|e| e.coeffs[i] == 0))
            .collect()
    }

    /// The subsystem formed by the given equations (0-based), kept in the
    /// original `r` variables.
    pub fn subsystem(&self, indices: &[usize]) -> Result<Self> {
        let mut equations = Vec::with_capacity(indices.len());
        for &i in indices {
            let eq = self.equations.get(i).ok_or_else(|| {
                Error::InvalidArgument(format!("equation index {} out of range", i + 1))
            })?;
            equations.push(eq.clone());
        }
        Ok(Self {
            r: self.r,
            equations,
            names: self.names.clone(),
        })
    }

    /// Canonical text: minimal signs, terms in variable order, one equation per
    /// line. The empty system renders as `∅(r)`.
    pub fn render(&self) -> String {
        if self.equations.is_empty() {
            return format!("∅({})", self.r);
        }
        self.equations
            .iter()
            .map(|e| render_row(&e.coeffs, &self.names))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl fmt::Display for ZSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn render_row(coeffs: &[i64], names: &[String]) -> String {
    let mut out = String::new();
    for (i, &c) in coeffs.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let mag = c.unsigned_abs();
        if out.is_empty() {
            if c < 0 {
                out.push('-');
            }
        } else {
            out.push_str(if c < 0 { " - " } else { " + " });
        }
        if mag != 1 {
            out.push_str(&mag.to_string());
        }
        out.push_str(&names[i]);
    }
    out.push_str(" = 0");
    out
}

pub fn is_balanced(s: &ZSystem) -> bool {
    s.is_balanced()
}

/// Parses `.lineq` text. Variables are indexed by their numeric suffix and
/// `r` is the largest index mentioned.
pub fn parse_system(text: &str) -> Result<ZSystem> {
    let mut rows: Vec<(usize, Vec<(usize, i64)>)> = Vec::new();
    let mut r = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let terms = parse_line(line, lineno + 1)?;
        for &(idx, _) in &terms {
            r = r.max(idx);
        }
        rows.push((lineno + 1, terms));
    }
    if rows.is_empty() {
        return Err(Error::NoEquations);
    }
    if r > MAX_VARIABLES {
        return Err(Error::TooLarge {
            what: "variable count",
            limit: MAX_VARIABLES,
        });
    }
    if rows.len() > MAX_EQUATIONS {
        return Err(Error::TooLarge {
            what: "equation count",
            limit: MAX_EQUATIONS,
        });
    }
    let mut dense = Vec::with_capacity(rows.len());
    for (line, terms) in rows {
        let mut row = vec![0i64; r];
        for (idx, c) in terms {
            row[idx - 1] = row[idx - 1]
                .checked_add(c)
                .ok_or(Error::CoefficientOverflow {
                    position: Position { line, column: 1 },
                })?;
        }
        if row.iter().all(|&c| c == 0) {
            return Err(Error::ZeroEquation { line });
        }
        dense.push(row);
    }
    ZSystem::from_rows(r, dense)
}

struct LineLexer<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    line: usize,
    _src: &'a str,
}

impl<'a> LineLexer<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        let chars = src
            .chars()
            .enumerate()
            .filter(|(_, c)| !c.is_whitespace())
            .map(|(i, c)| (i + 1, c))
            .collect();
        Self {
            chars,
            pos: 0,
            line,
            _src: src,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn position(&self) -> Position {
        let column = match self.chars.get(self.pos) {
            Some(&(col, _)) => col,
            None => self.chars.last().map_or(1, |&(col, _)| col + 1),
        };
        Position {
            line: self.line,
            column,
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            position: self.position(),
            message: message.into(),
        }
    }

    fn digits(&mut self) -> Option<(Position, String)> {
        let start = self.position();
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                s.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        if s.is_empty() {
            None
        } else {
            Some((start, s))
        }
    }
}

fn parse_line(line: &str, lineno: usize) -> Result<Vec<(usize, i64)>> {
    let mut lx = LineLexer::new(line, lineno);
    let mut terms = Vec::new();
    let mut first = true;
    loop {
        let sign = match lx.peek() {
            Some('+') => {
                lx.pos += 1;
                1i64
            }
            Some('-') => {
                lx.pos += 1;
                -1i64
            }
            Some(_) if first => 1,
            Some('=') => break,
            Some(c) => return Err(lx.error(format!("expected '+', '-' or '=', found '{c}'"))),
            None => return Err(lx.error("expected '= 0'")),
        };
        first = false;
        let coeff = match lx.digits() {
            Some((pos, s)) => {
                let v: i64 = s
                    .parse()
                    .map_err(|_| Error::CoefficientOverflow { position: pos })?;
                v.checked_mul(sign)
                    .ok_or(Error::CoefficientOverflow { position: pos })?
            }
            None => sign,
        };
        match lx.peek() {
            Some('x') | Some('X') => lx.pos += 1,
            Some(c) => return Err(lx.error(format!("expected 'x', found '{c}'"))),
            None => return Err(lx.error("expected 'x'")),
        }
        if lx.peek() == Some('-') {
            return Err(Error::VariableIndex {
                position: lx.position(),
            });
        }
        let (pos, digits) = lx
            .digits()
            .ok_or_else(|| lx.error("expected variable index"))?;
        let idx: usize = digits
            .parse()
            .map_err(|_| Error::VariableIndex { position: pos })?;
        if idx == 0 {
            return Err(Error::VariableIndex { position: pos });
        }
        if idx > MAX_VARIABLES {
            return Err(Error::TooLarge {
                what: "variable index",
                limit: MAX_VARIABLES,
            });
        }
        terms.push((idx, coeff));
    }
    lx.pos += 1; // '='
    match lx.peek() {
        Some('0') => lx.pos += 1,
        _ => return Err(lx.error("right-hand side must be 0")),
    }
    if let Some(c) = lx.peek() {
        return Err(lx.error(format!("unexpected '{c}' after '= 0'")));
    }
    if terms.is_empty() {
        return Err(lx.error("equation has no terms"));
    }
    Ok(terms)
}

/// Deterministic Miller–Rabin, exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub(crate) fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// Largest prime modulus supported by the residue arithmetic.
pub const MAX_PRIME: u64 = (1 << 31) - 1;

/// A system of 𝔽_p-equations, entries stored as least nonnegative residues.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct FpSystem {
    p: u64,
    r: usize,
    rows: Vec<Vec<u64>>,
}

impl FpSystem {
    pub fn new(p: u64, r: usize, rows: Vec<Vec<u64>>) -> Result<Self> {
        require_prime(p)?;
        if p > MAX_PRIME {
            return Err(Error::TooLarge {
                what: "prime modulus",
                limit: MAX_PRIME as usize,
            });
        }
        for row in &rows {
            if row.len() != r {
                return Err(Error::InvalidArgument(format!(
                    "row has {} entries, expected {r}",
                    row.len()
                )));
            }
            if let Some(&bad) = row.iter().find(|&&a| a >= p) {
                return Err(Error::InvalidArgument(format!(
                    "entry {bad} is not a residue mod {p}"
                )));
            }
        }
        Ok(Self { p, r, rows })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn variable_count(&self) -> usize {
        self.r
    }

    pub fn equation_count(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn is_balanced(&self) -> bool {
        self.rows
            .iter()
            .all(|row| row.iter().map(|&a| a as u128).sum::<u128>() % self.p as u128 == 0)
    }

    /// Coefficients as signed integers (residues in `[0, p)`), for the
    /// enumeration code which works over ℤ and 𝔽_p alike.
    pub fn signed_rows(&self) -> Vec<Vec<i64>> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&a| a as i64).collect())
            .collect()
    }

    /// Entrywise lift to the symmetric range `(-p/2, p/2]`.
    pub fn lift(&self) -> Result<ZSystem> {
        let p = self.p as i64;
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&a| {
                        if 2 * a as i64 > p {
                            a as i64 - p
                        } else {
                            a as i64
                        }
                    })
                    .collect()
            })
            .collect();
        ZSystem::from_rows(self.r, rows)
    }
}

/// Result of reducing a ℤ-system modulo a prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModReduction {
    pub system: FpSystem,
    /// `(equation, variable)` pairs (0-based) whose nonzero coefficient vanished.
    pub vanished: Vec<(usize, usize)>,
}

impl ModReduction {
    pub fn support_changed(&self) -> bool {
        !self.vanished.is_empty()
    }
}

/// Reduces every coefficient to its least nonnegative residue mod `p`.
pub fn reduce_mod_p(s: &ZSystem, p: u64) -> Result<ModReduction> {
    require_prime(p)?;
    let pi = p as i128;
    let mut vanished = Vec::new();
    let rows = s
        .equations()
        .iter()
        .enumerate()
        .map(|(l, e)| {
            e.coeffs()
                .iter()
                .enumerate()
                .map(|(i, &c)| {
                    let res = (c as i128).rem_euclid(pi) as u64;
                    if c != 0 && res == 0 {
                        vanished.push((l, i));
                    }
                    res
                })
                .collect()
        })
        .collect();
    let system = FpSystem::new(p, s.variable_count(), rows)?;
    Ok(ModReduction { system, vanished })
}
