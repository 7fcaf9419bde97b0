//! LP-format export of the full integer model, a small reader for the same
//! format, and import of solver solutions.
//!
//! Variables are `x_e_d_s` (binary, employee `e` works shift `s` on day `d`),
//! `y_d_s` (understaffing) and `z_d_s` (overstaffing), all indices 1-based.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{evaluate, Instance, Schedule, ShiftCode, NUM_SHIFTS};

fn x(e: usize, d: usize, s: usize) -> String {
    format!("x_{}_{}_{}", e + 1, d + 1, s + 1)
}

/// Accumulates `coef name` terms and wraps long expressions.
#[derive(Default)]
struct Expr {
    terms: Vec<(i64, String)>,
}

impl Expr {
    fn add(&mut self, coef: i64, var: String) -> &mut Self {
        if coef != 0 {
            self.terms.push((coef, var));
        }
        self
    }

    fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0 x_1_1_1".to_string();
        }
        let mut out = String::new();
        for (i, (c, v)) in self.terms.iter().enumerate() {
            if i > 0 && i % 8 == 0 {
                out.push_str("\n   ");
            }
            let sign = if *c < 0 {
                "-"
            } else if i > 0 {
                "+"
            } else {
                ""
            };
            let mag = c.unsigned_abs();
            if !sign.is_empty() {
                out.push_str(sign);
                out.push(' ');
            }
            if mag != 1 {
                let _ = write!(out, "{mag} ");
            }
            out.push_str(v);
            out.push(' ');
        }
        out.trim_end().to_string()
    }
}

/// Renders the model in LP text format.
pub fn write_lp(instance: &Instance) -> Result<String> {
    instance.validate()?;
    let (e_n, d_n) = (instance.num_employees, instance.num_days);
    let hours = i64::from(instance.hours_per_shift);
    let mut out = String::new();
    let _ = writeln!(out, "\\ staff rostering: {e_n} employees, {d_n} days");

    let mut obj = Expr::default();
    for d in 0..d_n {
        for s in 0..NUM_SHIFTS {
            obj.add(
                instance.understaff_weight as i64,
                format!("y_{}_{}", d + 1, s + 1),
            );
        }
    }
    for d in 0..d_n {
        for s in 0..NUM_SHIFTS {
            obj.add(
                instance.overstaff_weight as i64,
                format!("z_{}_{}", d + 1, s + 1),
            );
        }
    }
    for e in 0..e_n {
        for d in 0..d_n {
            for s in 0..NUM_SHIFTS {
                obj.add(instance.pref(e, d) as i64, x(e, d, s));
            }
        }
    }
    let _ = writeln!(out, "Minimize\n obj: {}", obj.render());
    out.push_str("Subject To\n");

    let mut row = |name: String, expr: &Expr, sense: &str, rhs: i64| {
        let _ = writeln!(out, " {name}: {} {sense} {rhs}", expr.render());
    };
    let worked = |expr: &mut Expr, e: usize, d: usize, coef: i64| {
        for s in 0..NUM_SHIFTS {
            expr.add(coef, x(e, d, s));
        }
    };

    for e in 0..e_n {
        for d in 0..d_n {
            let mut ex = Expr::default();
            worked(&mut ex, e, d, 1);
            row(format!("c1_{}_{}", e + 1, d + 1), &ex, "<=", 1);
        }
    }
    for e in 0..e_n {
        for d in 0..d_n.saturating_sub(1) {
            let mut ex = Expr::default();
            ex.add(1, x(e, d, 2)).add(1, x(e, d + 1, 0));
            row(format!("c2_{}_{}", e + 1, d + 1), &ex, "<=", 1);
        }
    }
    for e in 0..e_n {
        let mut ex = Expr::default();
        for d in 0..d_n {
            worked(&mut ex, e, d, hours);
        }
        row(
            format!("c3min_{}", e + 1),
            &ex,
            ">=",
            i64::from(instance.min_hours),
        );
        row(
            format!("c3max_{}", e + 1),
            &ex,
            "<=",
            i64::from(instance.max_hours),
        );
    }
    let cmax = instance.max_consecutive;
    for e in 0..e_n {
        for t in 0..d_n.saturating_sub(cmax) {
            let mut ex = Expr::default();
            for d in t..=t + cmax {
                worked(&mut ex, e, d, 1);
            }
            row(format!("c4_{}_{}", e + 1, t + 1), &ex, "<=", cmax as i64);
        }
    }
    // (1 - w_d) + sum_{j=d+1}^{d+t} w_j + (1 - w_{d+t+1}) >= 1
    for e in 0..e_n {
        for t in 1..instance.min_rest {
            for d in 0..d_n.saturating_sub(t + 1) {
                let mut ex = Expr::default();
                worked(&mut ex, e, d, -1);
                for j in d + 1..=d + t {
                    worked(&mut ex, e, j, 1);
                }
                worked(&mut ex, e, d + t + 1, -1);
                row(format!("c5_{}_{}_{}", e + 1, t, d + 1), &ex, ">=", -1);
            }
        }
    }
    for d in 0..d_n {
        for s in 0..NUM_SHIFTS {
            let u = i64::from(instance.coverage[d][s]);
            let mut under = Expr::default();
            under.add(1, format!("y_{}_{}", d + 1, s + 1));
            let mut over = Expr::default();
            over.add(1, format!("z_{}_{}", d + 1, s + 1));
            for e in 0..e_n {
                under.add(1, x(e, d, s));
                over.add(-1, x(e, d, s));
            }
            row(format!("under_{}_{}", d + 1, s + 1), &under, ">=", u);
            row(format!("over_{}_{}", d + 1, s + 1), &over, ">=", -u);
        }
    }

    out.push_str("Bounds\n");
    for prefix in ["y", "z"] {
        for d in 0..d_n {
            for s in 0..NUM_SHIFTS {
                let _ = writeln!(out, " {prefix}_{}_{} >= 0", d + 1, s + 1);
            }
        }
    }
    out.push_str("Binaries\n");
    for e in 0..e_n {
        let names: Vec<String> = (0..d_n)
            .flat_map(|d| (0..NUM_SHIFTS).map(move |s| x(e, d, s)))
            .collect();
        let _ = writeln!(out, " {}", names.join(" "));
    }
    out.push_str("End\n");
    Ok(out)
}

pub fn export_lp(instance: &Instance, path: &Path) -> Result<()> {
    let text = write_lp(instance)?;
    crate::io::ensure_parent(path)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `x_e_d_s value` lines for every binary variable.
pub fn write_solution(schedule: &Schedule) -> String {
    let mut out = String::new();
    for e in 0..schedule.employees() {
        for d in 0..schedule.days() {
            let code = schedule.get(e, d);
            for s in 0..NUM_SHIFTS {
                let v = u8::from(code.shift_index() == Some(s));
                let _ = writeln!(out, "{} {v}", x(e, d, s));
            }
        }
    }
    out
}

fn parse_x_name(name: &str) -> Option<(usize, usize, usize)> {
    let mut it = name
        .strip_prefix("x_")?
        .split('_')
        .map(|p| p.parse::<usize>().ok());
    let (e, d, s) = (it.next()??, it.next()??, it.next()??);
    if it.next().is_some() || e == 0 || d == 0 || s == 0 {
        return None;
    }
    Some((e - 1, d - 1, s - 1))
}

/// Reads a solver solution and certifies it as the instance's reference optimum.
///
/// Lines that are not `x_e_d_s` assignments (objective values, `y`/`z`
/// variables, comments) are skipped. `name = value` is accepted as well.
pub fn import_solution(instance: &Instance, path: &Path) -> Result<(Schedule, u64)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_solution(instance, &text)
}

pub fn parse_solution(instance: &Instance, text: &str) -> Result<(Schedule, u64)> {
    instance.validate()?;
    let (e_n, d_n) = (instance.num_employees, instance.num_days);
    let mut schedule = Schedule::new(e_n, d_n, ShiftCode::Rest);
    for (lineno, line) in text.lines().enumerate() {
        let cleaned = line.replace('=', " ");
        let mut parts = cleaned.split_whitespace();
        let (Some(name), Some(value)) = (parts.next(), parts.next()) else {
            continue;
        };
        if !name.starts_with("x_") {
            continue;
        }
        let (e, d, s) = parse_x_name(name)
            .filter(|&(e, d, s)| e < e_n && d < d_n && s < NUM_SHIFTS)
            .ok_or_else(|| {
                Error::InvalidSolution(format!("line {}: unknown variable {name}", lineno + 1))
            })?;
        let v: f64 = value.parse().map_err(|_| {
            Error::InvalidSolution(format!("line {}: bad value {value:?}", lineno + 1))
        })?;
        let on = if (v - 1.0).abs() < 1e-6 {
            true
        } else if v.abs() < 1e-6 {
            false
        } else {
            return Err(Error::InvalidSolution(format!(
                "{name} = {v} is not binary"
            )));
        };
        if on {
            if schedule.works(e, d) {
                return Err(Error::InvalidSolution(format!(
                    "C1 violated: employee {} has two shifts on day {}",
                    e + 1,
                    d + 1
                )));
            }
            schedule.set(e, d, ShiftCode::from_shift_index(s));
        }
    }
    let report = evaluate(&schedule, instance)?;
    if report.hard_total > 0 {
        let mut violated = Vec::new();
        for (tag, n) in [
            ("C2", report.c2_count),
            ("C3", report.c3_count),
            ("C4", report.c4_count),
            ("C5", report.c5_count),
        ] {
            if n > 0 {
                violated.push(format!("{tag} ({n})"));
            }
        }
        return Err(Error::InvalidSolution(format!(
            "infeasible: {} violated",
            violated.join(", ")
        )));
    }
    Ok((schedule, report.soft_unnormalized))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct LpRow {
    pub name: String,
    pub terms: Vec<(f64, usize)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A parsed LP file: linear objective, rows, binary and continuous variables.
///
/// Supports the subset of the LP format that [`write_lp`] emits.
#[derive(Debug, Clone, Default)]
pub struct LpModel {
    pub variables: Vec<String>,
    pub index: HashMap<String, usize>,
    pub objective: Vec<(f64, usize)>,
    pub rows: Vec<LpRow>,
    pub binaries: Vec<usize>,
    /// Variables declared in `Bounds` with a lower bound of zero.
    pub continuous: Vec<usize>,
}

impl LpModel {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.variables.push(name.to_string());
        self.index
            .insert(name.to_string(), self.variables.len() - 1);
        self.variables.len() - 1
    }

    fn parse_terms(&mut self, expr: &str) -> Result<Vec<(f64, usize)>> {
        let mut terms = Vec::new();
        let mut sign = 1.0;
        let mut coef: Option<f64> = None;
        for tok in expr.split_whitespace() {
            match tok {
                "+" => sign = 1.0,
                "-" => sign = -1.0,
                _ => {
                    if let Ok(v) = tok.parse::<f64>() {
                        coef = Some(v);
                    } else {
                        let i = self.var(tok);
                        terms.push((sign * coef.unwrap_or(1.0), i));
                        sign = 1.0;
                        coef = None;
                    }
                }
            }
        }
        Ok(terms)
    }

    pub fn parse(text: &str) -> Result<LpModel> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Objective,
            Constraints,
            Bounds,
            Binaries,
        }
        // join continuation lines onto the statement they belong to
        let mut statements: Vec<String> = Vec::new();
        for line in text.lines() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('\\') {
                continue;
            }
            let is_header = matches!(
                trimmed.to_ascii_lowercase().as_str(),
                "minimize" | "subject to" | "bounds" | "binaries" | "end"
            );
            if line.starts_with("   ") && !is_header {
                if let Some(last) = statements.last_mut() {
                    last.push(' ');
                    last.push_str(trimmed);
                    continue;
                }
            }
            statements.push(trimmed.to_string());
        }

        let mut m = LpModel::default();
        let mut section = Section::None;
        for st in statements {
            match st.to_ascii_lowercase().as_str() {
                "minimize" => {
                    section = Section::Objective;
                    continue;
                }
                "subject to" => {
                    section = Section::Constraints;
                    continue;
                }
                "bounds" => {
                    section = Section::Bounds;
                    continue;
                }
                "binaries" => {
                    section = Section::Binaries;
                    continue;
                }
                "end" => break,
                _ => {}
            }
            match section {
                Section::Objective => {
                    let body = st.split_once(':').map(|(_, b)| b).unwrap_or(&st);
                    m.objective = m.parse_terms(body)?;
                }
                Section::Constraints => {
                    let (name, body) = st
                        .split_once(':')
                        .ok_or_else(|| Error::InvalidInput(format!("unnamed row {st:?}")))?;
                    let (lhs, sense, rhs) = if let Some((l, r)) = body.split_once("<=") {
                        (l, Sense::Le, r)
                    } else if let Some((l, r)) = body.split_once(">=") {
                        (l, Sense::Ge, r)
                    } else if let Some((l, r)) = body.split_once('=') {
                        (l, Sense::Eq, r)
                    } else {
                        return Err(Error::InvalidInput(format!("row without sense {st:?}")));
                    };
                    let rhs: f64 = rhs.trim().parse().map_err(|_| {
                        Error::InvalidInput(format!("row {name} has a non-numeric rhs"))
                    })?;
                    let terms = m.parse_terms(lhs)?;
                    m.rows.push(LpRow {
                        name: name.trim().to_string(),
                        terms,
                        sense,
                        rhs,
                    });
                }
                Section::Bounds => {
                    let (name, rest) = st
                        .split_once(">=")
                        .ok_or_else(|| Error::InvalidInput(format!("unsupported bound {st:?}")))?;
                    if rest.trim().parse::<f64>().ok() != Some(0.0) {
                        return Err(Error::InvalidInput(format!("unsupported bound {st:?}")));
                    }
                    let i = m.var(name.trim());
                    m.continuous.push(i);
                }
                Section::Binaries => {
                    for name in st.split_whitespace() {
                        let i = m.var(name);
                        m.binaries.push(i);
                    }
                }
                Section::None => {
                    return Err(Error::InvalidInput(format!("text before Minimize: {st:?}")));
                }
            }
        }
        Ok(m)
    }

    /// Rows mentioning no continuous variable.
    fn pure_rows(&self) -> (Vec<usize>, Vec<usize>) {
        let is_cont: Vec<bool> = {
            let mut v = vec![false; self.variables.len()];
            for &c in &self.continuous {
                v[c] = true;
            }
            v
        };
        let (mut pure, mut mixed) = (Vec::new(), Vec::new());
        for (i, r) in self.rows.iter().enumerate() {
            if r.terms.iter().any(|&(_, v)| is_cont[v]) {
                mixed.push(i);
            } else {
                pure.push(i);
            }
        }
        (pure, mixed)
    }

    /// Objective value at a binary assignment with each continuous variable at
    /// its smallest feasible value, or `None` if a row is violated.
    ///
    /// Continuous variables must appear with a positive coefficient in `>=`
    /// rows only, one per row, and carry nonnegative objective weight.
    pub fn objective_at(&self, values: &[f64]) -> Option<f64> {
        let (pure, mixed) = self.pure_rows();
        let mut vals = values.to_vec();
        for &c in &self.continuous {
            vals[c] = 0.0;
        }
        for &ri in &mixed {
            let r = &self.rows[ri];
            let (&(cc, cv), rest): (&(f64, usize), Vec<&(f64, usize)>) = {
                let cont: Vec<_> = r
                    .terms
                    .iter()
                    .filter(|(_, v)| self.continuous.contains(v))
                    .collect();
                let rest = r
                    .terms
                    .iter()
                    .filter(|(_, v)| !self.continuous.contains(v))
                    .collect();
                (cont[0], rest)
            };
            let partial: f64 = rest.iter().map(|(c, v)| c * values[*v]).sum();
            let need = (r.rhs - partial) / cc;
            if need > vals[cv] {
                vals[cv] = need;
            }
        }
        for &ri in &pure {
            let r = &self.rows[ri];
            let lhs: f64 = r.terms.iter().map(|(c, v)| c * vals[*v]).sum();
            let ok = match r.sense {
                Sense::Le => lhs <= r.rhs + 1e-9,
                Sense::Ge => lhs >= r.rhs - 1e-9,
                Sense::Eq => (lhs - r.rhs).abs() <= 1e-9,
            };
            if !ok {
                return None;
            }
        }
        Some(self.objective.iter().map(|(c, v)| c * vals[*v]).sum())
    }

    /// Exact minimum by depth-first enumeration of the binaries, pruning on
    /// rows that can no longer be satisfied. Only practical for a few dozen
    /// binaries with tight rows.
    pub fn brute_force_min(&self) -> Option<(f64, Vec<f64>)> {
        let (pure, _) = self.pure_rows();
        let mut rows_by_last: Vec<Vec<usize>> = vec![Vec::new(); self.binaries.len()];
        let pos: HashMap<usize, usize> = self
            .binaries
            .iter()
            .enumerate()
            .map(|(p, &v)| (v, p))
            .collect();
        for &ri in &pure {
            let last = self.rows[ri]
                .terms
                .iter()
                .filter_map(|(_, v)| pos.get(v))
                .max();
            if let Some(&l) = last {
                rows_by_last[l].push(ri);
            }
        }
        let mut values = vec![0.0; self.variables.len()];
        let mut best: Option<(f64, Vec<f64>)> = None;
        self.enumerate(0, &rows_by_last, &mut values, &mut best);
        best
    }

    fn row_possible(&self, ri: usize, values: &[f64], assigned_upto: usize) -> bool {
        let r = &self.rows[ri];
        let (mut lo, mut hi) = (0.0, 0.0);
        for &(c, v) in &r.terms {
            let p = self
                .binaries
                .iter()
                .position(|&b| b == v)
                .unwrap_or(usize::MAX);
            if p <= assigned_upto {
                lo += c * values[v];
                hi += c * values[v];
            } else if c > 0.0 {
                hi += c;
            } else {
                lo += c;
            }
        }
        match r.sense {
            Sense::Le => lo <= r.rhs + 1e-9,
            Sense::Ge => hi >= r.rhs - 1e-9,
            Sense::Eq => lo <= r.rhs + 1e-9 && hi >= r.rhs - 1e-9,
        }
    }

    fn enumerate(
        &self,
        k: usize,
        rows_by_last: &[Vec<usize>],
        values: &mut Vec<f64>,
        best: &mut Option<(f64, Vec<f64>)>,
    ) {
        if k == self.binaries.len() {
            if let Some(obj) = self.objective_at(values) {
                if best.as_ref().is_none_or(|(b, _)| obj < *b) {
                    *best = Some((obj, values.clone()));
                }
            }
            return;
        }
        for bit in [0.0, 1.0] {
            values[self.binaries[k]] = bit;
            if rows_by_last[k]
                .iter()
                .all(|&ri| self.row_possible(ri, values, k))
            {
                self.enumerate(k + 1, rows_by_last, values, best);
            }
        }
        values[self.binaries[k]] = 0.0;
    }
}
