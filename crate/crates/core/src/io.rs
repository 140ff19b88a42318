//! Plain-text input formats: edge lists and one-value-per-line files.
//!
//! Blank lines and anything after `#` are ignored. Line numbers in errors are 1-based.

use crate::error::{Error, Result};
use crate::mmspace::{normalize_measure, ProbabilityMeasure, WeightedGraph};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((i + 1, body))
    })
}

fn parse_field<T: std::str::FromStr>(line: usize, field: &str, what: &str) -> Result<T> {
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} `{field}`"),
    })
}

/// `i j w` per line. The node count is one more than the largest index unless
/// `nodes` is given.
pub fn parse_edge_list(text: &str, nodes: Option<usize>) -> Result<WeightedGraph> {
    let mut edges = Vec::new();
    let mut max_index = None;
    for (line, body) in content_lines(text) {
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected `i j w`, found {} fields", fields.len()),
            });
        }
        let from: usize = parse_field(line, fields[0], "node index")?;
        let to: usize = parse_field(line, fields[1], "node index")?;
        let weight: f64 = parse_field(line, fields[2], "weight")?;
        max_index = Some(max_index.unwrap_or(0).max(from).max(to));
        edges.push((from, to, weight));
    }
    let n = nodes.unwrap_or_else(|| max_index.map_or(0, |m| m + 1));
    if n == 0 {
        return Err(Error::EmptySpace);
    }
    WeightedGraph::new(n, edges)
}

/// One number per line.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    content_lines(text)
        .map(|(line, body)| {
            let v: f64 = parse_field(line, body, "number")?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite value `{body}`"),
                });
            }
            Ok(v)
        })
        .collect()
}

/// One nonnegative weight per line, rescaled to total mass one.
pub fn parse_measure(text: &str) -> Result<ProbabilityMeasure> {
    normalize_measure(&parse_values(text)?)
}

/// One value per line, in shortest round-trip form.
pub fn format_values(values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 20);
    for v in values {
        out.push_str(&format!("{v}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmspace::build_graph_metric;

    #[test]
    fn path_edge_list() {
        let g = parse_edge_list("# path\n0 1 1.0\n1 2 1.0  # second\n\n", None).unwrap();
        assert_eq!(g.node_count(), 3);
        let space = build_graph_metric(&g).unwrap();
        assert_eq!(space.dist(0, 2), 2.0);
    }

    #[test]
    fn malformed_line_reports_number() {
        match parse_edge_list("0 1 1.0\n0 x 1\n", None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_edge_list("0 1\n", None),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(parse_edge_list("# nothing\n", None), Err(Error::EmptySpace)));
    }

    #[test]
    fn values_and_measures() {
        assert_eq!(parse_values("1\n-2.5\n# c\n3e-1\n").unwrap(), vec![1.0, -2.5, 0.3]);
        assert!(matches!(parse_values("1\nnan\n"), Err(Error::Parse { line: 2, .. })));
        let mu = parse_measure("1\n3\n").unwrap();
        assert_eq!(mu.weights(), &[0.25, 0.75]);
        let text = format_values(&[0.1, -2.0]);
        assert_eq!(parse_values(&text).unwrap(), vec![0.1, -2.0]);
    }
}
