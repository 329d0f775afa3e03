//! Free-format MPS with `QCMATRIX` sections for quadratic rows.
//!
//! Every column gets explicit bounds. Integer columns are wrapped in
//! `'MARKER' 'INTORG'/'INTEND'` pairs. Quadratic rows store the full
//! coefficient of each `x_j^2` term in `QCMATRIX`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use crate::formulation::{LinearConstraint, ModelProblem, ObjSense, QuadConstraint, Sense, Variable};

const OBJ_ROW: &str = "obj";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("mps line {line}: {message}")]
pub struct MpsError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> MpsError {
    MpsError {
        line,
        message: message.into(),
    }
}

/// Shortest decimal text that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

/// Replaces characters that free MPS cannot carry inside a name.
pub fn sanitize_name(tag: &str) -> String {
    let mut out: String = tag
        .chars()
        .map(|c| if c.is_ascii_graphic() && c != '$' { c } else { '_' })
        .collect();
    if out.is_empty() {
        out.push('_');
    }
    out
}

/// Unique MPS names for linear rows followed by quadratic rows.
pub fn row_names(problem: &ModelProblem) -> Vec<String> {
    let mut seen = HashSet::new();
    seen.insert(OBJ_ROW.to_string());
    let tags = problem.rows.iter().map(|r| &r.tag).chain(problem.quads.iter().map(|q| &q.tag));
    tags.enumerate()
        .map(|(k, tag)| {
            let mut name = sanitize_name(tag);
            if !seen.insert(name.clone()) {
                name = format!("{name}#{k}");
                seen.insert(name.clone());
            }
            name
        })
        .collect()
}

fn sense_code(s: Sense) -> char {
    match s {
        Sense::Le => 'L',
        Sense::Ge => 'G',
        Sense::Eq => 'E',
    }
}

pub fn write_mps(problem: &ModelProblem) -> String {
    let names = row_names(problem);
    let (lin_names, quad_names) = names.split_at(problem.rows.len());
    let mut out = String::new();
    let _ = writeln!(out, "NAME {}", sanitize_name(&problem.name));
    out.push_str("OBJSENSE\n");
    out.push_str(match problem.sense {
        ObjSense::Minimize => "    MIN\n",
        ObjSense::Maximize => "    MAX\n",
    });
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N {OBJ_ROW}");
    for (r, name) in problem.rows.iter().zip(lin_names) {
        let _ = writeln!(out, " {} {name}", sense_code(r.sense));
    }
    for name in quad_names {
        let _ = writeln!(out, " L {name}");
    }

    let mut by_col: Vec<Vec<(&str, f64)>> = vec![Vec::new(); problem.vars.len()];
    for (j, c) in &problem.objective {
        if *c != 0.0 {
            by_col[*j].push((OBJ_ROW, *c));
        }
    }
    for (r, name) in problem.rows.iter().zip(lin_names) {
        for (j, a) in &r.coeffs {
            by_col[*j].push((name, *a));
        }
    }
    for (q, name) in problem.quads.iter().zip(quad_names) {
        for (j, a) in &q.linear {
            if *a != 0.0 {
                by_col[*j].push((name, *a));
            }
        }
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for (j, var) in problem.vars.iter().enumerate() {
        if var.integer != in_int {
            let kind = if var.integer { "INTORG" } else { "INTEND" };
            let _ = writeln!(out, "    M{marker} 'MARKER' '{kind}'");
            marker += 1;
            in_int = var.integer;
        }
        let col = sanitize_name(&var.name);
        if by_col[j].is_empty() {
            // Keeps the column declared when no row references it.
            let _ = writeln!(out, "    {col} {OBJ_ROW} 0");
        }
        for (row, a) in &by_col[j] {
            let _ = writeln!(out, "    {col} {row} {}", format_number(*a));
        }
    }
    if in_int {
        let _ = writeln!(out, "    M{marker} 'MARKER' 'INTEND'");
    }

    out.push_str("RHS\n");
    for (r, name) in problem.rows.iter().zip(lin_names) {
        if r.rhs != 0.0 {
            let _ = writeln!(out, "    RHS {name} {}", format_number(r.rhs));
        }
    }
    for (q, name) in problem.quads.iter().zip(quad_names) {
        if q.rhs != 0.0 {
            let _ = writeln!(out, "    RHS {name} {}", format_number(q.rhs));
        }
    }

    out.push_str("BOUNDS\n");
    for var in &problem.vars {
        let col = sanitize_name(&var.name);
        match (var.lb.is_finite(), var.ub.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " FR BND {col}");
            }
            _ if var.lb == var.ub => {
                let _ = writeln!(out, " FX BND {col} {}", format_number(var.lb));
            }
            (lb_fin, ub_fin) => {
                if lb_fin {
                    let _ = writeln!(out, " LO BND {col} {}", format_number(var.lb));
                } else {
                    let _ = writeln!(out, " MI BND {col}");
                }
                if ub_fin {
                    let _ = writeln!(out, " UP BND {col} {}", format_number(var.ub));
                } else {
                    let _ = writeln!(out, " PL BND {col}");
                }
            }
        }
    }

    for (q, name) in problem.quads.iter().zip(quad_names) {
        let _ = writeln!(out, "QCMATRIX {name}");
        for (j, a) in &q.diag {
            let col = sanitize_name(&problem.vars[*j].name);
            let _ = writeln!(out, "    {col} {col} {}", format_number(*a));
        }
    }
    out.push_str("ENDATA\n");
    out
}

#[derive(PartialEq, Clone, Copy)]
enum Section {
    None,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Bounds,
    QcMatrix,
    End,
}

enum RowRef {
    Objective,
    Row(usize),
}

fn number(line: usize, text: &str) -> Result<f64, MpsError> {
    let v: f64 = text
        .parse()
        .map_err(|_| err(line, format!("'{text}' is not a number")))?;
    if v.is_nan() {
        return Err(err(line, "NaN is not allowed"));
    }
    Ok(v)
}

/// Parses the subset of free MPS written by [`write_mps`]: one `N` row, `L`,
/// `G`, `E` rows, integer markers, `RHS`, `BOUNDS` (`LO UP FX FR MI PL BV`)
/// and diagonal `QCMATRIX` entries.
///
/// Rows that own a `QCMATRIX` section come back as quadratic rows.
pub fn parse_mps(text: &str) -> Result<ModelProblem, MpsError> {
    let mut name = String::new();
    let mut sense = ObjSense::Minimize;
    let mut section = Section::None;
    let mut obj_name: Option<String> = None;
    let mut row_decl: Vec<(String, Sense)> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut vars: Vec<Variable> = Vec::new();
    let mut var_index: HashMap<String, usize> = HashMap::new();
    let mut bounded: Vec<bool> = Vec::new();
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut objective: BTreeMap<usize, f64> = BTreeMap::new();
    let mut rhs: HashMap<usize, f64> = HashMap::new();
    let mut quad_of: BTreeMap<usize, BTreeMap<usize, f64>> = BTreeMap::new();
    let mut current_q: Option<usize> = None;
    let mut in_int = false;
    let mut last_line = 0;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        let header = !raw.starts_with(' ') && !raw.starts_with('\t');
        if header {
            match fields[0] {
                "NAME" => {
                    name = fields.get(1).unwrap_or(&"").to_string();
                    section = Section::None;
                }
                "OBJSENSE" => {
                    section = Section::ObjSense;
                    if let Some(s) = fields.get(1) {
                        sense = parse_sense(line, s)?;
                        section = Section::None;
                    }
                }
                "ROWS" => section = Section::Rows,
                "COLUMNS" => section = Section::Columns,
                "RHS" => section = Section::Rhs,
                "BOUNDS" => section = Section::Bounds,
                "RANGES" | "QUADOBJ" | "QMATRIX" | "SOS" => {
                    return Err(err(line, format!("section {} is not supported", fields[0])));
                }
                "QCMATRIX" => {
                    let row = fields.get(1).ok_or_else(|| err(line, "QCMATRIX without a row name"))?;
                    let r = *row_index
                        .get(*row)
                        .ok_or_else(|| err(line, format!("QCMATRIX for unknown row {row}")))?;
                    if row_decl[r].1 != Sense::Le {
                        return Err(err(line, format!("quadratic row {row} must be of type L")));
                    }
                    if quad_of.contains_key(&r) {
                        return Err(err(line, format!("second QCMATRIX section for row {row}")));
                    }
                    quad_of.insert(r, BTreeMap::new());
                    current_q = Some(r);
                    section = Section::QcMatrix;
                }
                "ENDATA" => {
                    section = Section::End;
                    break;
                }
                other => return Err(err(line, format!("unknown section {other}"))),
            }
            continue;
        }
        match section {
            Section::None | Section::End => return Err(err(line, "data line outside a section")),
            Section::ObjSense => {
                sense = parse_sense(line, fields[0])?;
                section = Section::None;
            }
            Section::Rows => {
                let [kind, row] = fields[..] else {
                    return Err(err(line, "expected '<type> <name>' in ROWS"));
                };
                let s = match kind {
                    "N" => {
                        if obj_name.is_some() {
                            return Err(err(line, "more than one objective row"));
                        }
                        obj_name = Some(row.to_string());
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    other => return Err(err(line, format!("unknown row type {other}"))),
                };
                if row_index.insert(row.to_string(), row_decl.len()).is_some() || obj_name.as_deref() == Some(row) {
                    return Err(err(line, format!("duplicate row {row}")));
                }
                row_decl.push((row.to_string(), s));
            }
            Section::Columns => {
                if fields.len() == 3 && fields[1] == "'MARKER'" {
                    in_int = match fields[2] {
                        "'INTORG'" => true,
                        "'INTEND'" => false,
                        other => return Err(err(line, format!("unknown marker {other}"))),
                    };
                    continue;
                }
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(err(line, "expected '<col> <row> <value> [<row> <value>]'"));
                }
                let col = fields[0];
                let j = match var_index.get(col) {
                    Some(j) => {
                        if *j + 1 != vars.len() {
                            return Err(err(line, format!("entries of column {col} are not contiguous")));
                        }
                        *j
                    }
                    None => {
                        vars.push(Variable {
                            name: col.to_string(),
                            lb: 0.0,
                            ub: if in_int { 1.0 } else { f64::INFINITY },
                            integer: in_int,
                        });
                        bounded.push(false);
                        var_index.insert(col.to_string(), vars.len() - 1);
                        vars.len() - 1
                    }
                };
                for pair in fields[1..].chunks(2) {
                    let v = number(line, pair[1])?;
                    match resolve_row(line, pair[0], &obj_name, &row_index)? {
                        RowRef::Objective => {
                            if v != 0.0 {
                                *objective.entry(j).or_insert(0.0) += v;
                            }
                        }
                        RowRef::Row(r) => entries.push((r, j, v)),
                    }
                }
            }
            Section::Rhs => {
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(err(line, "expected '<set> <row> <value> [<row> <value>]'"));
                }
                for pair in fields[1..].chunks(2) {
                    let v = number(line, pair[1])?;
                    match resolve_row(line, pair[0], &obj_name, &row_index)? {
                        RowRef::Objective => return Err(err(line, "objective constants are not supported")),
                        RowRef::Row(r) => {
                            rhs.insert(r, v);
                        }
                    }
                }
            }
            Section::Bounds => {
                if fields.len() < 3 {
                    return Err(err(line, "expected '<type> <set> <col> [<value>]'"));
                }
                let col = fields[2];
                let j = *var_index
                    .get(col)
                    .ok_or_else(|| err(line, format!("bound on unknown column {col}")))?;
                let value = || -> Result<f64, MpsError> {
                    number(line, fields.get(3).ok_or_else(|| err(line, "bound value missing"))?)
                };
                if !bounded[j] {
                    bounded[j] = true;
                    if vars[j].integer {
                        vars[j].ub = f64::INFINITY;
                    }
                }
                let var = &mut vars[j];
                match fields[0] {
                    "LO" => var.lb = value()?,
                    "UP" => var.ub = value()?,
                    "FX" => {
                        let v = value()?;
                        var.lb = v;
                        var.ub = v;
                    }
                    "FR" => {
                        var.lb = f64::NEG_INFINITY;
                        var.ub = f64::INFINITY;
                    }
                    "MI" => var.lb = f64::NEG_INFINITY,
                    "PL" => var.ub = f64::INFINITY,
                    "BV" => {
                        var.lb = 0.0;
                        var.ub = 1.0;
                        var.integer = true;
                    }
                    other => return Err(err(line, format!("unknown bound type {other}"))),
                }
            }
            Section::QcMatrix => {
                let [a, b, v] = fields[..] else {
                    return Err(err(line, "expected '<col> <col> <value>' in QCMATRIX"));
                };
                let ja = *var_index
                    .get(a)
                    .ok_or_else(|| err(line, format!("unknown column {a}")))?;
                let jb = *var_index
                    .get(b)
                    .ok_or_else(|| err(line, format!("unknown column {b}")))?;
                if ja != jb {
                    return Err(err(line, "only diagonal quadratic terms are supported"));
                }
                let v = number(line, v)?;
                let r = current_q.expect("set with section");
                *quad_of.get_mut(&r).expect("created with section").entry(ja).or_insert(0.0) += v;
            }
        }
    }
    if section != Section::End {
        return Err(err(last_line, "missing ENDATA"));
    }
    if obj_name.is_none() {
        return Err(err(last_line, "no objective row"));
    }

    let mut rows: Vec<LinearConstraint> = row_decl
        .iter()
        .map(|(n, s)| LinearConstraint::new(n.clone(), *s, 0.0))
        .collect();
    for (r, j, v) in entries {
        rows[r].add(j, v);
    }
    for (r, v) in rhs {
        rows[r].rhs = v;
    }
    let mut quads = Vec::new();
    let mut linear_rows = Vec::new();
    for (r, row) in rows.into_iter().enumerate() {
        match quad_of.remove(&r) {
            Some(diag) => quads.push(QuadConstraint {
                diag,
                linear: row.coeffs,
                rhs: row.rhs,
                tag: row.tag,
            }),
            None => linear_rows.push(row),
        }
    }
    Ok(ModelProblem {
        name,
        vars,
        rows: linear_rows,
        quads,
        objective,
        sense,
    })
}

fn parse_sense(line: usize, s: &str) -> Result<ObjSense, MpsError> {
    match s {
        "MIN" | "MINIMIZE" => Ok(ObjSense::Minimize),
        "MAX" | "MAXIMIZE" => Ok(ObjSense::Maximize),
        other => Err(err(line, format!("unknown objective sense {other}"))),
    }
}

fn resolve_row(
    line: usize,
    row: &str,
    obj: &Option<String>,
    index: &HashMap<String, usize>,
) -> Result<RowRef, MpsError> {
    if obj.as_deref() == Some(row) {
        return Ok(RowRef::Objective);
    }
    index
        .get(row)
        .map(|r| RowRef::Row(*r))
        .ok_or_else(|| err(line, format!("unknown row {row}")))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn lp2() -> ModelProblem {
        let mut p = ModelProblem::new("two var", ObjSense::Minimize);
        let x = p.add_var("x", 0.0, f64::INFINITY, false);
        let y = p.add_var("y", -1.5, 2.0, true);
        p.objective.insert(x, 1.0);
        p.objective.insert(y, -0.1);
        p.push_row(LinearConstraint::new("c one", Sense::Ge, 3.0).with(x, 1.0).with(y, 1.0 / 3.0));
        p.push_row(LinearConstraint::new("c two", Sense::Eq, -2.5).with(x, 1e-20).with(y, 1e300));
        p
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let p = lp2();
        let text = write_mps(&p);
        let q = parse_mps(&text).unwrap();
        assert_eq!(q.vars, p.vars);
        assert_eq!(q.objective, p.objective);
        assert_eq!(q.rows.len(), 2);
        assert_eq!(q.rows[0].coefficient(0).to_bits(), 1.0f64.to_bits());
        assert_eq!(q.rows[0].coefficient(1).to_bits(), (1.0f64 / 3.0).to_bits());
        assert_eq!(q.rows[1].coefficient(1), 1e300);
        assert_eq!(q.rows[1].rhs, -2.5);
        assert_eq!(q.rows[0].tag, "c_one");
    }

    #[test]
    fn number_text_is_round_trip_safe() {
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(-0.25), "-0.25");
        let third = format_number(1.0 / 3.0);
        assert!(third.trim_start_matches("0.").len() <= 17);
        assert_eq!(third.parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn one_quadratic_row_gives_one_section() {
        let mut p = lp2();
        p.quads.push(QuadConstraint {
            diag: BTreeMap::from([(0, 2.0), (1, 0.5)]),
            linear: BTreeMap::from([(0, -1.0)]),
            rhs: 4.0,
            tag: "emission-quadratic".into(),
        });
        let text = write_mps(&p);
        assert_eq!(text.matches("QCMATRIX").count(), 1);
        let q = parse_mps(&text).unwrap();
        assert_eq!(q.quads.len(), 1);
        assert_eq!(q.quads[0].diag, p.quads[0].diag);
        assert_eq!(q.quads[0].linear, p.quads[0].linear);
        assert_eq!(q.quads[0].rhs, 4.0);
    }

    #[test]
    fn malformed_input_names_the_line() {
        let text = "NAME x\nROWS\n N obj\n L c1\nCOLUMNS\n    x c1 abc\nENDATA\n";
        let e = parse_mps(text).unwrap_err();
        assert_eq!(e.line, 6);
        assert!(parse_mps("NAME x\nROWS\n N obj\n").is_err());
    }

    #[test]
    fn duplicate_tags_get_unique_names() {
        let mut p = ModelProblem::new("d", ObjSense::Minimize);
        let x = p.add_var("x", 0.0, 1.0, false);
        p.push_row(LinearConstraint::new("r", Sense::Le, 1.0).with(x, 1.0));
        p.push_row(LinearConstraint::new("r", Sense::Le, 2.0).with(x, 1.0));
        let names = row_names(&p);
        assert_ne!(names[0], names[1]);
        assert_eq!(parse_mps(&write_mps(&p)).unwrap().rows.len(), 2);
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![
            -1e6..1e6f64,
            any::<f64>().prop_filter("finite nonzero", |v| v.is_finite() && *v != 0.0),
        ]
    }

    proptest! {
        #[test]
        fn random_problems_round_trip(
            coefs in proptest::collection::vec((0usize..4, 0usize..5, finite()), 1..30),
            bounds in proptest::collection::vec((finite(), 0.0..10.0f64, any::<bool>()), 5),
            rhs in proptest::collection::vec(finite(), 4),
        ) {
            let mut p = ModelProblem::new("rt", ObjSense::Maximize);
            for (k, (lb, w, int)) in bounds.iter().enumerate() {
                p.add_var(format!("v{k}"), lb.min(1e12), lb.min(1e12) + w, *int);
            }
            for (r, b) in rhs.iter().enumerate() {
                let s = [Sense::Le, Sense::Ge, Sense::Eq][r % 3];
                p.push_row(LinearConstraint::new(format!("row {r}"), s, *b));
            }
            for (r, j, a) in coefs {
                p.rows[r].add(j, a);
            }
            p.objective.insert(0, 2.5);
            let q = parse_mps(&write_mps(&p)).unwrap();
            prop_assert_eq!(&q.vars, &p.vars);
            prop_assert_eq!(q.rows.len(), p.rows.len());
            for (a, b) in q.rows.iter().zip(&p.rows) {
                prop_assert_eq!(&a.coeffs, &b.coeffs);
                prop_assert_eq!(a.rhs.to_bits(), b.rhs.to_bits());
                prop_assert_eq!(a.sense, b.sense);
            }
            prop_assert_eq!(q.sense, ObjSense::Maximize);
        }
    }
}
