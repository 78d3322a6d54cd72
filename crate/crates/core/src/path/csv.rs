//! Path serialization.
//!
//! ```text
//! # xi=0.5
//! # kind=grid
//! # left_limit=1.25        (only when recorded)
//! t,value
//! 0,2
//! 0.25,4
//! 0.5,                     (Δ row at ξ, only when ξ is finite)
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{PathKind, StepPath};
use crate::error::{Error, Result};

pub fn write_csv<W: Write>(path: &StepPath, mut out: W) -> Result<()> {
    writeln!(out, "# xi={}", path.explosion_time())?;
    let kind = match path.kind() {
        PathKind::Grid => "grid",
        PathKind::Jump => "jump",
    };
    writeln!(out, "# kind={kind}")?;
    if let Some(l) = path.left_limit_at_explosion() {
        writeln!(out, "# left_limit={l}")?;
    }
    writeln!(out, "t,value")?;
    for (i, v) in path.values().iter().enumerate() {
        writeln!(out, "{},{}", path.time(i), v)?;
    }
    if path.explosion_time().is_finite() {
        writeln!(out, "{},", path.explosion_time())?;
    }
    Ok(())
}

pub fn write_csv_file(path: &StepPath, file: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(file)?);
    write_csv(path, &mut w)?;
    w.flush()?;
    Ok(())
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Csv { line, msg: format!("{s:?}: {e}") })
}

pub fn read_csv<R: Read>(input: R) -> Result<StepPath> {
    let reader = BufReader::new(input);
    let mut xi = None;
    let mut kind = PathKind::Grid;
    let mut left_limit = None;
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut saw_delta = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            let (key, val) = meta
                .trim()
                .split_once('=')
                .ok_or_else(|| Error::Csv { line: lineno, msg: "malformed header".into() })?;
            match key.trim() {
                "xi" => xi = Some(parse_f64(val, lineno)?),
                "kind" => {
                    kind = match val.trim() {
                        "grid" => PathKind::Grid,
                        "jump" => PathKind::Jump,
                        other => {
                            return Err(Error::Csv { line: lineno, msg: format!("unknown kind {other:?}") })
                        }
                    }
                }
                "left_limit" => left_limit = Some(parse_f64(val, lineno)?),
                other => {
                    return Err(Error::Csv { line: lineno, msg: format!("unknown header key {other:?}") })
                }
            }
            continue;
        }
        if line == "t,value" {
            continue;
        }
        if saw_delta {
            return Err(Error::Csv { line: lineno, msg: "rows after the Δ row".into() });
        }
        let (t, v) = line
            .split_once(',')
            .ok_or_else(|| Error::Csv { line: lineno, msg: "expected two columns".into() })?;
        let t = parse_f64(t, lineno)?;
        if v.trim().is_empty() {
            saw_delta = true;
            if xi.is_some_and(|x| x != t) {
                return Err(Error::Csv { line: lineno, msg: "Δ row does not sit at ξ".into() });
            }
            xi.get_or_insert(t);
            continue;
        }
        times.push(t);
        values.push(parse_f64(v, lineno)?);
    }
    let xi = xi.ok_or(Error::Csv { line: 1, msg: "missing `# xi=` header".into() })?;
    StepPath::new(times, values, xi)?.with_kind(kind).with_left_limit(left_limit)
}

pub fn read_csv_file(file: &Path) -> Result<StepPath> {
    read_csv(File::open(file)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn format_is_stable() {
        let p = StepPath::new(vec![0.0, 0.25], vec![2.0, 4.0], 0.5).unwrap().with_left_limit(Some(1.25)).unwrap();
        let mut buf = Vec::new();
        write_csv(&p, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "# xi=0.5\n# kind=grid\n# left_limit=1.25\nt,value\n0,2\n0.25,4\n0.5,\n"
        );
    }

    #[test]
    fn rejects_missing_header_and_bad_rows() {
        assert!(read_csv("t,value\n0,1\n".as_bytes()).is_err());
        let err = read_csv("# xi=inf\nt,value\n0,abc\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Csv { line: 3, .. }), "{err}");
    }

    proptest! {
        #[test]
        fn roundtrip_is_lossless(gaps in prop::collection::vec(1e-6f64..10.0, 0..20), vals in prop::collection::vec(-1e9f64..1e9, 21), tail in prop::option::of(1e-6f64..1.0), jump in any::<bool>()) {
            let mut t = 0.0;
            let mut times = vec![0.0];
            for g in &gaps { t += g; times.push(t); }
            let values = vals[..times.len()].to_vec();
            let xi = tail.map_or(f64::INFINITY, |g| t + g);
            let kind = if jump { PathKind::Jump } else { PathKind::Grid };
            let p = StepPath::new(times, values, xi).unwrap().with_kind(kind);
            let mut buf = Vec::new();
            write_csv(&p, &mut buf).unwrap();
            let q = read_csv(buf.as_slice()).unwrap();
            prop_assert!(p.same_knots(&q));
            prop_assert_eq!(p.kind(), q.kind());
        }
    }
}
