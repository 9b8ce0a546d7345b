//! File formats: demo sets (JSON lines), path files (CSV), curriculum
//! checkpoints (JSON) and comparison reports (CSV).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};

use serde::{Deserialize, Serialize};

use crate::curriculum::CurriculumState;
use crate::demo::{Demo, DemoSet, DemoSource};
use crate::env::{ComparisonReport, Scheme};
use crate::error::{Error, Result};
use crate::geom::{self, Point3};
use crate::path::Path;

/// One line of a demo file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoFileRecord {
    pub demo_id: String,
    pub assembly_id: String,
    pub points: Vec<Point3>,
    pub source: DemoSource,
    pub seed: u64,
}

pub fn write_demos<W: Write>(set: &DemoSet, mut out: W) -> Result<()> {
    for d in set.demos() {
        let rec = DemoFileRecord {
            demo_id: d.id.clone(),
            assembly_id: set.assembly_id().to_string(),
            points: d.path.points().to_vec(),
            source: d.source,
            seed: d.seed,
        };
        serde_json::to_writer(&mut out, &rec).map_err(|e| Error::Io(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a demo file. Blank lines are skipped; errors carry 1-based line numbers.
pub fn read_demos<R: BufRead>(input: R) -> Result<DemoSet> {
    let mut assembly: Option<String> = None;
    let mut demos = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: line_no, message };
        let rec: DemoFileRecord = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if let Some(k) = rec.points.iter().position(|p| !geom::is_finite(p)) {
            return Err(parse_err(format!("non-finite point at index {k}")));
        }
        match &assembly {
            Some(a) if *a != rec.assembly_id => {
                return Err(parse_err(format!(
                    "assembly id `{}` differs from `{a}`",
                    rec.assembly_id
                )))
            }
            Some(_) => {}
            None => assembly = Some(rec.assembly_id.clone()),
        }
        let path = Path::new(rec.points).map_err(|e| parse_err(e.to_string()))?;
        demos.push(Demo {
            id: rec.demo_id,
            path,
            source: rec.source,
            seed: rec.seed,
        });
    }
    match assembly {
        Some(a) => DemoSet::new(a, demos),
        None => Err(Error::EmptyDataset),
    }
}

pub fn save_demos(set: &DemoSet, path: &std::path::Path) -> Result<()> {
    write_demos(set, BufWriter::new(File::create(path)?))
}

pub fn load_demos(path: &std::path::Path) -> Result<DemoSet> {
    read_demos(BufReader::new(File::open(path)?))
}

/// Parses `x,y,z` rows. A first row that is not numeric is taken as a header.
pub fn read_path_csv<R: BufRead>(input: R) -> Result<Path> {
    let mut points = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if i == 0 => continue,
            Err(e) => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })
            }
        };
        let [x, y, z] = values[..] else {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected 3 columns, found {}", values.len()),
            });
        };
        if ![x, y, z].iter().all(|v| v.is_finite()) {
            return Err(Error::Parse {
                line: i + 1,
                message: "non-finite coordinate".into(),
            });
        }
        points.push([x, y, z]);
    }
    if points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Path::new(points)
}

pub fn write_path_csv<W: Write>(path: &Path, mut out: W) -> Result<()> {
    writeln!(out, "x,y,z")?;
    for p in path.points() {
        writeln!(out, "{},{},{}", p[0], p[1], p[2])?;
    }
    out.flush()?;
    Ok(())
}

pub fn load_path_csv(file: &std::path::Path) -> Result<Path> {
    read_path_csv(BufReader::new(File::open(file)?))
}

pub type Checkpoint = BTreeMap<Scheme, CurriculumState>;

pub fn save_checkpoint(states: &Checkpoint, path: &std::path::Path) -> Result<()> {
    let text = serde_json::to_string_pretty(states).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_checkpoint(path: &std::path::Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn save_report_csv(report: &ComparisonReport, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, report.to_csv())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curriculum::{record_and_maybe_advance, CurriculumConfig};
    use crate::env::{generate_disassembly_demos, EnvConfig};

    #[test]
    fn demo_round_trip_is_exact() {
        let set = generate_disassembly_demos(&EnvConfig::default(), "00042", 7, 5).unwrap();
        let mut buf = Vec::new();
        write_demos(&set, &mut buf).unwrap();
        assert_eq!(String::from_utf8_lossy(&buf).lines().count(), 7);
        assert_eq!(read_demos(&buf[..]).unwrap(), set);
    }

    #[test]
    fn empty_file_is_an_error() {
        assert_eq!(read_demos(&b""[..]), Err(Error::EmptyDataset));
        assert_eq!(read_demos(&b"\n\n"[..]), Err(Error::EmptyDataset));
    }

    #[test]
    fn bad_line_reports_number() {
        let good = r#"{"demo_id":"a","assembly_id":"x","points":[[0,0,0]],"source":"imported","seed":0}"#;
        let text = format!("{good}\n{{not json\n");
        assert!(matches!(read_demos(text.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let empty = r#"{"demo_id":"a","assembly_id":"x","points":[],"source":"imported","seed":0}"#;
        assert!(matches!(read_demos(empty.as_bytes()), Err(Error::Parse { line: 1, .. })));
        let mixed = good.replace("\"x\"", "\"y\"");
        assert!(matches!(
            read_demos(format!("{good}\n{mixed}\n").as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn path_csv_round_trip() {
        let p = Path::new(vec![[0.1, -2.5, 3.0], [1e-9, 0.0, 7.25]]).unwrap();
        let mut buf = Vec::new();
        write_path_csv(&p, &mut buf).unwrap();
        assert_eq!(read_path_csv(&buf[..]).unwrap(), p);
        assert!(matches!(read_path_csv(&b"1,2\n"[..]), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read_path_csv(&b"x,y,z\n1,2,nan\n"[..]), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn checkpoint_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("c.json");
        let mut s = CurriculumState::new(&CurriculumConfig::default()).unwrap();
        for i in 0..37 {
            s = record_and_maybe_advance(s, i % 3 == 0);
        }
        let states: Checkpoint = [(Scheme::Dtw, s.clone()), (Scheme::None, s)].into_iter().collect();
        save_checkpoint(&states, &file).unwrap();
        assert_eq!(load_checkpoint(&file).unwrap(), states);
    }
}
