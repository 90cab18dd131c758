use num_rational::BigRational;

use super::{Edge, MultiGraph};
use crate::error::{Error, Result};
use crate::scalar::parse_ratio;

/// Parses the graph text format.
///
/// ```text
/// # comment
/// p 1/2            # optional default probability
/// edge s a         # uses the default
/// edge a t 0.25    # per-edge override
/// ```
///
/// Vertices are numbered in order of first mention. `fallback` applies to
/// edges without a probability when the text has no `p` line.
pub(super) fn parse_graph(text: &str, fallback: Option<&BigRational>) -> Result<MultiGraph> {
    let mut names: Vec<String> = Vec::new();
    let mut pending: Vec<(usize, usize, Option<BigRational>, usize)> = Vec::new();
    let mut default_p: Option<BigRational> = None;

    let err = |line: usize, message: String| Error::GraphFormat { line, message };

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "p" => {
                if tokens.len() != 2 {
                    return Err(err(line_no, "expected `p <probability>`".into()));
                }
                if default_p.is_some() {
                    return Err(err(line_no, "default probability given twice".into()));
                }
                let p = parse_ratio(tokens[1]).map_err(|e| err(line_no, e.to_string()))?;
                default_p = Some(p);
            }
            "edge" => {
                if !(3..=4).contains(&tokens.len()) {
                    return Err(err(line_no, "expected `edge <u> <v> [<p>]`".into()));
                }
                let mut index = |name: &str| match names.iter().position(|n| n == name) {
                    Some(i) => i,
                    None => {
                        names.push(name.to_string());
                        names.len() - 1
                    }
                };
                let u = index(tokens[1]);
                let v = index(tokens[2]);
                if u == v {
                    return Err(err(line_no, format!("loop at `{}`", tokens[1])));
                }
                let p = match tokens.get(3) {
                    Some(t) => Some(parse_ratio(t).map_err(|e| err(line_no, e.to_string()))?),
                    None => None,
                };
                pending.push((u, v, p, line_no));
            }
            other => return Err(err(line_no, format!("unknown directive `{other}`"))),
        }
    }

    let mut edges = Vec::with_capacity(pending.len());
    for (u, v, p, line_no) in pending {
        let p = match p.or_else(|| default_p.clone()).or_else(|| fallback.cloned()) {
            Some(p) => p,
            None => return Err(err(line_no, "edge has no probability and no default `p`".into())),
        };
        edges.push(Edge { u, v, p });
    }
    MultiGraph::new(names, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn parse_graph_strict(text: &str) -> Result<MultiGraph> {
        parse_graph(text, None)
    }

    #[test]
    fn vertices_numbered_by_first_mention() {
        let g = parse_graph_strict("# header\np 1/3\nedge b a\nedge a c 0.5 # trailing\n\nedge c b\n").unwrap();
        assert_eq!(g.names(), ["b", "a", "c"]);
        assert_eq!(g.edges()[0].p, ratio(1, 3));
        assert_eq!(g.edges()[1].p, ratio(1, 2));
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn default_may_follow_edges() {
        let g = parse_graph_strict("edge a b\np 1/4\n").unwrap();
        assert_eq!(g.edges()[0].p, ratio(1, 4));
    }

    #[test]
    fn format_errors_carry_line_numbers() {
        let cases = [
            ("edge a a\n", 1),
            ("p 1/2\nedge a\n", 2),
            ("p 1/2\nnode a\n", 2),
            ("edge a b\n", 1),
            ("p 1/2\np 1/3\n", 2),
            ("p 1/2\nedge a b 1/x\n", 2),
        ];
        for (text, line) in cases {
            match parse_graph_strict(text) {
                Err(Error::GraphFormat { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
        assert!(matches!(parse_graph_strict("edge a b 0\n"), Err(Error::InvalidGraph(_))));
        assert!(matches!(parse_graph_strict("edge a b 2\n"), Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn text_round_trip() {
        let g = parse_graph_strict("edge x y 1/3\nedge y z 2/5\nedge x y 1\n").unwrap();
        assert_eq!(parse_graph_strict(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn fallback_only_fills_missing_probabilities() {
        let g = parse_graph("edge a b\nedge b c 1/3\n", Some(&ratio(1, 2))).unwrap();
        assert_eq!((g.edges()[0].p.clone(), g.edges()[1].p.clone()), (ratio(1, 2), ratio(1, 3)));
        let g = parse_graph("p 1/4\nedge a b\n", Some(&ratio(1, 2))).unwrap();
        assert_eq!(g.edges()[0].p, ratio(1, 4));
    }
}
