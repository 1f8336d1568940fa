//! alist interchange format for parity-check matrices.
//!
//! Layout (whitespace-separated decimal integers, LF line endings):
//!
//! ```text
//! n num_checks
//! max_var_degree max_check_degree
//! <n variable degrees>
//! <num_checks check degrees>
//! <n lines: 1-indexed check neighbors per variable, zero-padded>
//! <num_checks lines: 1-indexed variable neighbors per check, zero-padded>
//! ```
//!
//! The parser tolerates missing or extra zero padding and `\r\n` endings;
//! the serializer always emits the canonical zero-padded form, so
//! `serialize(parse(s))` is a fixed point after one normalization pass.

use super::{CodeGraph, CodeGraphError};

fn parse_err(line: usize, msg: impl Into<String>) -> CodeGraphError {
    CodeGraphError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_ints(line: &str, lineno: usize) -> Result<Vec<usize>, CodeGraphError> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| parse_err(lineno, format!("expected integer, found {tok:?}")))
        })
        .collect()
}

/// Parse a neighbor line: non-zero entries are 1-indexed neighbors, zeros are
/// padding and must only trail the real entries.
fn parse_neighbors(
    line: &str,
    lineno: usize,
    declared_degree: usize,
    limit: usize,
) -> Result<Vec<usize>, CodeGraphError> {
    let raw = parse_ints(line, lineno)?;
    let mut neighbors = Vec::with_capacity(declared_degree);
    let mut padding = false;
    for &x in &raw {
        if x == 0 {
            padding = true;
            continue;
        }
        if padding {
            return Err(parse_err(lineno, "non-zero entry after zero padding"));
        }
        if x > limit {
            return Err(parse_err(
                lineno,
                format!("neighbor index {x} out of range (max {limit})"),
            ));
        }
        let idx = x - 1;
        if neighbors.contains(&idx) {
            return Err(parse_err(lineno, format!("duplicate neighbor {x}")));
        }
        neighbors.push(idx);
    }
    if neighbors.len() != declared_degree {
        return Err(parse_err(
            lineno,
            format!(
                "declared degree {declared_degree} but found {} neighbors",
                neighbors.len()
            ),
        ));
    }
    Ok(neighbors)
}

/// Parse an alist document into a [`CodeGraph`].
pub fn parse_alist(text: &str) -> Result<CodeGraph, CodeGraphError> {
    let lines: Vec<&str> = text.lines().collect();
    let line = |i: usize| -> Result<&str, CodeGraphError> {
        lines
            .get(i)
            .copied()
            .ok_or_else(|| parse_err(i + 1, "unexpected end of file"))
    };

    let header = parse_ints(line(0)?, 1)?;
    let [n, num_checks] = header[..] else {
        return Err(parse_err(1, "malformed header, expected \"n num_checks\""));
    };
    if n == 0 || num_checks == 0 {
        return Err(parse_err(1, "blocklength and check count must be positive"));
    }

    let maxdeg = parse_ints(line(1)?, 2)?;
    let [max_var_deg, max_check_deg] = maxdeg[..] else {
        return Err(parse_err(2, "malformed max-degree line"));
    };

    let var_degrees = parse_ints(line(2)?, 3)?;
    if var_degrees.len() != n {
        return Err(parse_err(3, format!("expected {n} variable degrees")));
    }
    let check_degrees = parse_ints(line(3)?, 4)?;
    if check_degrees.len() != num_checks {
        return Err(parse_err(4, format!("expected {num_checks} check degrees")));
    }
    let sum_v: usize = var_degrees.iter().sum();
    let sum_c: usize = check_degrees.iter().sum();
    if sum_v != sum_c {
        return Err(parse_err(
            4,
            format!("variable degrees sum to {sum_v} but check degrees sum to {sum_c}"),
        ));
    }
    if var_degrees.iter().any(|&d| d > max_var_deg) {
        return Err(parse_err(3, "variable degree exceeds declared maximum"));
    }
    if check_degrees.iter().any(|&d| d > max_check_deg) {
        return Err(parse_err(4, "check degree exceeds declared maximum"));
    }

    let mut edges = Vec::with_capacity(sum_v);
    #[allow(clippy::needless_range_loop)] // v is also the 1-indexed line offset
    for v in 0..n {
        let lineno = 5 + v;
        let checks = parse_neighbors(line(lineno - 1)?, lineno, var_degrees[v], num_checks)?;
        for c in checks {
            edges.push((v, c));
        }
    }
    // cross-check: the check-side lists must describe the same edge set
    let mut from_checks = Vec::with_capacity(sum_c);
    #[allow(clippy::needless_range_loop)] // c is also the 1-indexed line offset
    for c in 0..num_checks {
        let lineno = 5 + n + c;
        let vars = parse_neighbors(line(lineno - 1)?, lineno, check_degrees[c], n)?;
        for v in vars {
            from_checks.push((v, c));
        }
    }
    let mut a = edges.clone();
    let mut b = from_checks;
    a.sort_unstable();
    b.sort_unstable();
    if a != b {
        return Err(parse_err(
            5 + n,
            "variable and check neighbor sections disagree",
        ));
    }

    CodeGraph::from_edges(n, num_checks, edges)
}

/// Serialize a [`CodeGraph`] into the canonical zero-padded alist form.
pub fn serialize_alist(g: &CodeGraph) -> Result<String, CodeGraphError> {
    if g.n() == 0 {
        return Err(CodeGraphError::Serialize(
            "cannot serialize an empty graph".to_string(),
        ));
    }
    let max_v = g.max_var_degree();
    let max_c = g.max_check_degree();
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", g.n(), g.num_checks()));
    out.push_str(&format!("{max_v} {max_c}\n"));
    push_ints(&mut out, g.var_degrees().iter().copied());
    push_ints(&mut out, g.check_degrees().iter().copied());
    for v in 0..g.n() {
        let neighbors = g.var_edges(v).iter().map(|&e| g.edge(e).1 + 1);
        push_padded(&mut out, neighbors, max_v);
    }
    for c in 0..g.num_checks() {
        let neighbors = g.check_edges(c).iter().map(|&e| g.edge(e).0 + 1);
        push_padded(&mut out, neighbors, max_c);
    }
    Ok(out)
}

fn push_ints(out: &mut String, xs: impl Iterator<Item = usize>) {
    let line: Vec<String> = xs.map(|x| x.to_string()).collect();
    out.push_str(&line.join(" "));
    out.push('\n');
}

fn push_padded(out: &mut String, xs: impl Iterator<Item = usize>, width: usize) {
    let mut entries: Vec<usize> = xs.collect();
    while entries.len() < width {
        entries.push(0);
    }
    push_ints(out, entries.into_iter());
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code_graph::{hamming_7_4, spc, tanner_155};
    use proptest::prelude::*;

    #[test]
    fn spc3_round_trip_and_header() {
        let g = spc(3);
        let text = serialize_alist(&g).unwrap();
        assert!(text.starts_with("3 1\n"));
        assert_eq!(text.lines().count(), 3 + 4 + 1);
        let back = parse_alist(&text).unwrap();
        assert_eq!(back, g);
        // canonical form is a fixed point
        assert_eq!(serialize_alist(&back).unwrap(), text);
    }

    #[test]
    fn parse_single_parity_check_literal() {
        let text = "3 1\n1 3\n1 1 1\n3\n1\n1\n1\n1 2 3\n";
        let g = parse_alist(text).unwrap();
        assert_eq!(g.edges(), &[(0, 0), (1, 0), (2, 0)]);
        assert_eq!(g.theta(), 3);
    }

    #[test]
    fn hamming_round_trip() {
        let g = hamming_7_4();
        let text = serialize_alist(&g).unwrap();
        let back = parse_alist(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.theta(), 12);
    }

    #[test]
    fn tanner_round_trip_byte_identical() {
        let text = serialize_alist(&tanner_155()).unwrap();
        let again = serialize_alist(&parse_alist(&text).unwrap()).unwrap();
        assert_eq!(text, again);
    }

    #[test]
    fn degree_sum_mismatch_is_an_error_with_line() {
        // column degrees sum to 3, row degrees claim 2
        let text = "3 1\n1 2\n1 1 1\n2\n1\n1\n1\n1 2\n";
        match parse_alist(text) {
            Err(CodeGraphError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_neighbor_rejected() {
        let text = "2 1\n2 2\n1 1\n2\n1\n1\n1 1\n";
        assert!(matches!(
            parse_alist(text),
            Err(CodeGraphError::Parse { line: 7, .. })
        ));
    }

    #[test]
    fn out_of_range_neighbor_rejected() {
        let text = "2 1\n1 2\n1 1\n2\n2\n1\n1 2\n";
        assert!(matches!(
            parse_alist(text),
            Err(CodeGraphError::Parse { line: 5, .. })
        ));
    }

    #[test]
    fn zero_blocklength_header_rejected() {
        assert!(parse_alist("0 0\n0 0\n\n\n").is_err());
    }

    #[test]
    fn empty_graph_serialization_fails() {
        let g = crate::CodeGraph::from_edges(0, 0, vec![]).unwrap();
        assert!(serialize_alist(&g).is_err());
    }

    #[test]
    fn tolerates_crlf_and_extra_padding() {
        let text = "3 1\r\n2 3\r\n1 1 1\r\n3\r\n1 0\r\n1 0\r\n1 0\r\n1 2 3\r\n";
        let g = parse_alist(text).unwrap();
        assert_eq!(g, spc(3));
    }

    proptest! {
        // parse . serialize is the identity on normalized graphs
        #[test]
        fn round_trip_random_graphs(
            n in 1usize..12,
            num_checks in 1usize..8,
            mask in proptest::collection::vec(proptest::bool::ANY, 96),
        ) {
            let mut edges = Vec::new();
            for v in 0..n {
                for c in 0..num_checks {
                    if mask[v * 8 + c] {
                        edges.push((v, c));
                    }
                }
            }
            let g = crate::CodeGraph::from_edges(n, num_checks, edges).unwrap();
            let text = serialize_alist(&g).unwrap();
            let back = parse_alist(&text).unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(serialize_alist(&back).unwrap(), text);
        }
    }
}
