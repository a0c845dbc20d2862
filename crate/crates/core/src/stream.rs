//! Stream files: comma-separated traces with a header of port names.
//!
//! ```text
//! a,b
//! 0,1
//! _,1
//! ```
//!
//! Each row after the header is one tick; `_` is the undefined value.
//! Lines starting with `#` are ignored. With no ports the header line is
//! empty and every further line, blank or not, is a tick.

use thiserror::Error;

use crate::circuit::Port;
use crate::domain::{LValue, Signature, Ty};
use crate::sim::PrefixTrace;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct StreamError {
    pub line: usize,
    pub message: String,
}

fn split(line: &str) -> Vec<&str> {
    if line.trim().is_empty() {
        Vec::new()
    } else {
        line.split(',').map(str::trim).collect()
    }
}

/// Read a stream for `ports`. Columns are matched to ports by name, so
/// their order in the file is free.
pub fn parse_stream(text: &str, ports: &[Port]) -> Result<PrefixTrace, StreamError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim_start().starts_with('#'));
    let (hline, header) = lines.next().map(|(n, l)| (n, split(l))).unwrap_or((1, Vec::new()));
    let fail = |line: usize, message: String| StreamError { line, message };
    let mut column_of = Vec::with_capacity(ports.len());
    for p in ports {
        match header.iter().position(|h| *h == p.name) {
            Some(i) => column_of.push(i),
            None => return Err(fail(hline, format!("missing column `{}`", p.name))),
        }
    }
    if let Some(extra) = header.iter().find(|h| !ports.iter().any(|p| p.name == **h)) {
        return Err(fail(hline, format!("unknown column `{extra}`")));
    }
    for (i, h) in header.iter().enumerate() {
        if header[..i].contains(h) {
            return Err(fail(hline, format!("duplicate column `{h}`")));
        }
    }
    let sig = Signature::new(ports.iter().map(|p| p.ty.clone()).collect());
    let mut trace = PrefixTrace::new(sig);
    for (n, line) in lines {
        if !header.is_empty() && line.trim().is_empty() {
            continue;
        }
        let cells = split(line);
        if cells.len() != header.len() {
            return Err(fail(n, format!("expected {} cells, found {}", header.len(), cells.len())));
        }
        let row = ports
            .iter()
            .zip(&column_of)
            .map(|(p, &col)| {
                p.ty.parse_lvalue(cells[col])
                    .map_err(|_| fail(n, format!("`{}` is not a value of type {} for `{}`", cells[col], p.ty, p.name)))
            })
            .collect::<Result<Vec<LValue>, _>>()?;
        trace.push(row).map_err(|e| fail(n, e.to_string()))?;
    }
    Ok(trace)
}

/// Render a trace with the given column names.
pub fn write_stream(names: &[&str], types: &[Ty], trace: &PrefixTrace) -> String {
    let mut out = names.join(",");
    out.push('\n');
    for row in trace.ticks() {
        let cells: Vec<String> = types.iter().zip(row).map(|(ty, v)| ty.show(*v, "_")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::BaseType;

    fn ports() -> Vec<Port> {
        vec![
            Port { name: "a".into(), ty: BaseType::bool() },
            Port { name: "n".into(), ty: BaseType::int_range(1, 3).unwrap() },
        ]
    }

    #[test]
    fn round_trip_with_reordered_columns() {
        let t = parse_stream("n,a\n# comment\n1,0\n_,_\n3, 1\n", &ports()).unwrap();
        assert_eq!(
            t.ticks(),
            &[
                vec![LValue::Val(0), LValue::Val(0)],
                vec![LValue::Bot, LValue::Bot],
                vec![LValue::Val(1), LValue::Val(2)]
            ]
        );
        let types: Vec<Ty> = ports().into_iter().map(|p| p.ty).collect();
        let text = write_stream(&["a", "n"], &types, &t);
        assert_eq!(text, "a,n\n0,1\n_,_\n1,3\n");
        assert_eq!(parse_stream(&text, &ports()).unwrap(), t);
    }

    #[test]
    fn zero_columns() {
        let t = parse_stream("\n\n\n", &[]).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(write_stream(&[], &[], &t), "\n\n\n");
        assert_eq!(parse_stream("", &[]).unwrap().len(), 0);
    }

    #[test]
    fn errors_carry_lines() {
        assert_eq!(parse_stream("a\n0\n", &ports()).unwrap_err().line, 1);
        assert_eq!(parse_stream("a,n\n0,1\n0\n", &ports()).unwrap_err().line, 3);
        let e = parse_stream("a,n\n0,7\n", &ports()).unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("`7`"));
        assert!(parse_stream("a,n,z\n", &ports()).is_err());
    }
}
