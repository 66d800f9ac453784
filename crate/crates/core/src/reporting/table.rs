use serde::Serialize;

use super::ReportError;
use crate::space::{SearchSpace, VarType};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub name: String,
    pub var_type: String,
    pub lower: f64,
    pub upper: f64,
    pub default: Option<String>,
    pub tuned: String,
    pub importance: Option<f64>,
}

fn format_value(v: f64, ty: VarType, labels: Option<&[String]>) -> String {
    match ty {
        VarType::Float => format!("{v}"),
        VarType::Int => format!("{}", v.round() as i64),
        VarType::Factor { .. } => {
            let code = v.round() as usize;
            labels
                .and_then(|l| l.get(code))
                .cloned()
                .unwrap_or_else(|| code.to_string())
        }
    }
}

/// One row per variable: name, type, natural bounds, default and tuned value,
/// and importance when given. Factor codes are shown by label when
/// `labels[dim]` is non-empty.
pub fn results_table(
    space: &SearchSpace,
    best_x: &[f64],
    defaults: Option<&[f64]>,
    importance: Option<&[f64]>,
    labels: Option<&[Vec<String>]>,
) -> Result<Vec<TableRow>, ReportError> {
    let d = space.dims();
    let lens = [
        Some(best_x.len()),
        defaults.map(<[f64]>::len),
        importance.map(<[f64]>::len),
        labels.map(<[Vec<String>]>::len),
    ];
    if lens.iter().flatten().any(|&l| l != d) {
        return Err(ReportError::LengthMismatch(format!("table inputs must all have {d} entries")));
    }
    Ok((0..d)
        .map(|j| {
            let ty = space.var_type()[j];
            let lab = labels.map(|l| l[j].as_slice()).filter(|l| !l.is_empty());
            let (lower, upper) = space.bounds()[j];
            TableRow {
                name: space.var_name()[j].clone(),
                var_type: ty.label().to_owned(),
                lower,
                upper,
                default: defaults.map(|v| format_value(v[j], ty, lab)),
                tuned: format_value(best_x[j], ty, lab),
                importance: importance.map(|v| v[j]),
            }
        })
        .collect())
}

/// Plain-text rendering; the importance column appears only when present.
pub fn render_table(rows: &[TableRow]) -> String {
    let with_default = rows.iter().any(|r| r.default.is_some());
    let with_imp = rows.iter().any(|r| r.importance.is_some());
    let mut header = vec!["name", "type", "lower", "upper"];
    if with_default {
        header.push("default");
    }
    header.push("tuned");
    if with_imp {
        header.push("importance");
    }
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut c = vec![r.name.clone(), r.var_type.clone(), format!("{}", r.lower), format!("{}", r.upper)];
            if with_default {
                c.push(r.default.clone().unwrap_or_default());
            }
            c.push(r.tuned.clone());
            if with_imp {
                c.push(r.importance.map(|v| format!("{v:.2}")).unwrap_or_default());
            }
            c
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|j| body.iter().map(|r| r[j].len()).chain([header[j].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: Vec<String>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join(" | ")
            .trim_end()
            .to_owned()
    };
    let mut out = line(header.iter().map(|s| s.to_string()).collect());
    out.push('\n');
    out.push_str(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-|-"));
    for r in body {
        out.push('\n');
        out.push_str(&line(r));
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{ParameterSet, VarTrans};

    #[test]
    fn hpt_table() {
        let ps = ParameterSet::new()
            .add_float("lr", 1e-5, 0.1, 1e-3, VarTrans::Log10)
            .add_int("l1", 8, 128, 16)
            .add_int("layers", 1, 4, 2)
            .add_float("dropout", 0.0, 0.5, 0.1, VarTrans::Identity);
        let space = ps.to_space().unwrap();
        let rows = results_table(&space, &[0.01, 64.0, 3.0, 0.2], Some(&ps.defaults()), Some(&[100.0, 20.0, 5.0, 0.0]), None).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[1].tuned, "64");
        assert_eq!(rows[0].default.as_deref(), Some("0.001"));
        let text = render_table(&rows);
        assert!(text.starts_with("name"));
        assert!(text.contains("importance"));
        assert!(text.lines().count() == 6);
    }

    #[test]
    fn importance_column_omitted() {
        let space = SearchSpace::continuous(vec![(0.0, 1.0)]).unwrap();
        let rows = results_table(&space, &[0.5], None, None, None).unwrap();
        assert!(!render_table(&rows).contains("importance"));
        assert!(!render_table(&rows).contains("default"));
    }

    #[test]
    fn factor_label() {
        let space = SearchSpace::new(
            vec![(0.0, 2.0)],
            vec![VarType::Factor { levels: 3 }],
            vec![VarTrans::Identity],
            vec!["opt".into()],
        )
        .unwrap();
        let labels = vec![vec!["a".to_string(), "b".into(), "c".into()]];
        let rows = results_table(&space, &[2.0], None, None, Some(&labels)).unwrap();
        assert_eq!(rows[0].tuned, "c");
        assert!(results_table(&space, &[2.0, 1.0], None, None, None).is_err());
    }
}
