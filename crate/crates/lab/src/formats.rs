//! Field files and report CSVs. Schemas are documented in `docs/csv_schemas.md`.
//!
//! Binary field layout (little endian):
//! `b"LNLF"`, `u32` version, `u8` provenance tag, 3 zero bytes, `f64` h,
//! `u64` N, then N pairs of `f64` (re, im).
//!
//! CSV field layout: a first line `# latnls-field v1 h=<h> provenance=<name>`,
//! then columns `m,x,re,im`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context};
use latnls_core::dynamics::Trajectory;
use latnls_core::interp::Provenance;
use latnls_core::lattice::{LatticeField, PeriodicLattice};
use num_complex::Complex64;

pub const FIELD_MAGIC: &[u8; 4] = b"LNLF";
pub const FIELD_VERSION: u32 = 1;
/// Version of the report and check CSV schemas.
pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldFormat {
    Binary,
    Csv,
}

impl FieldFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => FieldFormat::Csv,
            _ => FieldFormat::Binary,
        }
    }
}

pub fn write_field(path: &Path, field: &LatticeField, provenance: Provenance) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    match FieldFormat::from_path(path) {
        FieldFormat::Binary => {
            w.write_all(FIELD_MAGIC)?;
            w.write_all(&FIELD_VERSION.to_le_bytes())?;
            w.write_all(&[provenance.tag(), 0, 0, 0])?;
            w.write_all(&field.h().to_le_bytes())?;
            w.write_all(&(field.len() as u64).to_le_bytes())?;
            for v in field.values() {
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
        FieldFormat::Csv => {
            writeln!(w, "# latnls-field v{FIELD_VERSION} h={} provenance={}", field.h(), provenance.name())?;
            let mut csv = csv::Writer::from_writer(&mut w);
            csv.write_record(["m", "x", "re", "im"])?;
            let lat = field.lattice();
            for (m, v) in field.values().iter().enumerate() {
                csv.write_record(&[m.to_string(), lat.position(m).to_string(), v.re.to_string(), v.im.to_string()])?;
            }
            csv.flush()?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_field(path: &Path) -> anyhow::Result<(LatticeField, Provenance)> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    match FieldFormat::from_path(path) {
        FieldFormat::Binary => read_binary(BufReader::new(file)),
        FieldFormat::Csv => read_csv(BufReader::new(file)),
    }
}

fn read_binary(mut r: impl Read) -> anyhow::Result<(LatticeField, Provenance)> {
    let mut head = [0u8; 28];
    r.read_exact(&mut head).context("field header truncated")?;
    ensure!(&head[0..4] == FIELD_MAGIC, "not a field file (bad magic)");
    let version = u32::from_le_bytes(head[4..8].try_into()?);
    ensure!(version == FIELD_VERSION, "unsupported field file version {version}");
    let provenance = Provenance::from_tag(head[8]).with_context(|| format!("unknown provenance tag {}", head[8]))?;
    let h = f64::from_le_bytes(head[12..20].try_into()?);
    let n = u64::from_le_bytes(head[20..28].try_into()?) as usize;
    let mut values = Vec::with_capacity(n);
    let mut buf = [0u8; 16];
    for m in 0..n {
        r.read_exact(&mut buf).with_context(|| format!("field data truncated at site {m}"))?;
        values.push(Complex64::new(
            f64::from_le_bytes(buf[0..8].try_into()?),
            f64::from_le_bytes(buf[8..16].try_into()?),
        ));
    }
    let lattice = PeriodicLattice::new(h, n)?;
    Ok((LatticeField::new(lattice, values)?, provenance))
}

fn read_csv(mut r: impl BufRead) -> anyhow::Result<(LatticeField, Provenance)> {
    let mut first = String::new();
    r.read_line(&mut first)?;
    let meta = first.trim().strip_prefix("# latnls-field").context("missing '# latnls-field' header line")?;
    let mut h = None;
    let mut provenance = None;
    for token in meta.split_whitespace() {
        match token.split_once('=') {
            Some(("h", v)) => h = Some(v.parse::<f64>().with_context(|| format!("bad h {v:?}"))?),
            Some(("provenance", v)) => {
                provenance = Some(
                    [Provenance::ClosedForm, Provenance::Interpolated, Provenance::Evolved]
                        .into_iter()
                        .find(|p| p.name() == v)
                        .with_context(|| format!("unknown provenance {v:?}"))?,
                )
            }
            _ if token.starts_with('v') => {
                let version: u32 = token[1..].parse().with_context(|| format!("bad version {token:?}"))?;
                ensure!(version == FIELD_VERSION, "unsupported field file version {version}");
            }
            _ => bail!("unexpected header token {token:?}"),
        }
    }
    let h = h.context("header lacks h=")?;
    let provenance = provenance.context("header lacks provenance=")?;
    let mut csv = csv::Reader::from_reader(r);
    let mut values = Vec::new();
    for (i, rec) in csv.records().enumerate() {
        let rec = rec?;
        let m: usize = rec.get(0).context("missing m")?.parse()?;
        ensure!(m == i, "row {i} carries site index {m}");
        let re: f64 = rec.get(2).context("missing re")?.parse()?;
        let im: f64 = rec.get(3).context("missing im")?.parse()?;
        values.push(Complex64::new(re, im));
    }
    let lattice = PeriodicLattice::new(h, values.len())?;
    Ok((LatticeField::new(lattice, values)?, provenance))
}

/// Conserved quantities and norms of one run at its record points.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedSeries {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    /// `(sigma, values)` per recorded `H^sigma` norm.
    pub norms: Vec<(f64, Vec<f64>)>,
}

impl ConservedSeries {
    pub fn from_trajectory<S>(traj: &Trajectory<S>) -> Self {
        Self {
            times: traj.times.clone(),
            mass: traj.mass_series.clone(),
            energy: traj.energy_series.clone(),
            norms: traj.norm_series.clone(),
        }
    }
}

/// Writes columns `t,mass,energy,h_sigma_<sigma>...`, one row per record point.
pub fn write_trajectory(series: &ConservedSeries, path: &Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let mut header = vec!["t".to_string(), "mass".into(), "energy".into()];
    header.extend(series.norms.iter().map(|(s, _)| format!("h_sigma_{s}")));
    w.write_record(&header)?;
    for (i, t) in series.times.iter().enumerate() {
        let mut row = vec![t.to_string(), series.mass[i].to_string(), series.energy[i].to_string()];
        row.extend(series.norms.iter().map(|(_, v)| v[i].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectory(path: &Path) -> anyhow::Result<ConservedSeries> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header = r.headers()?.clone();
    ensure!(header.len() >= 3 && &header[0] == "t", "not a trajectory file");
    let mut norms: Vec<(f64, Vec<f64>)> = header
        .iter()
        .skip(3)
        .map(|name| {
            let sigma = name.strip_prefix("h_sigma_").context("bad norm column")?.parse()?;
            Ok((sigma, Vec::new()))
        })
        .collect::<anyhow::Result<_>>()?;
    let mut out = ConservedSeries { times: Vec::new(), mass: Vec::new(), energy: Vec::new(), norms: Vec::new() };
    for rec in r.records() {
        let rec = rec?;
        let v = rec.iter().map(str::parse::<f64>).collect::<Result<Vec<_>, _>>()?;
        ensure!(v.len() == header.len(), "row has {} fields, expected {}", v.len(), header.len());
        out.times.push(v[0]);
        out.mass.push(v[1]);
        out.energy.push(v[2]);
        for (k, (_, col)) in norms.iter_mut().enumerate() {
            col.push(v[3 + k]);
        }
    }
    out.norms = norms;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> LatticeField {
        let lat = PeriodicLattice::new(0.125, 16).unwrap();
        LatticeField::from_fn(lat, |x| Complex64::new((-x * x).exp(), 0.1 * x)).unwrap()
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.lnf");
        write_field(&path, &sample(), Provenance::Evolved).unwrap();
        let (back, prov) = read_field(&path).unwrap();
        assert_eq!(back, sample());
        assert_eq!(prov, Provenance::Evolved);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        write_field(&path, &sample(), Provenance::Interpolated).unwrap();
        let (back, prov) = read_field(&path).unwrap();
        assert_eq!(back, sample());
        assert_eq!(prov, Provenance::Interpolated);
    }

    #[test]
    fn trajectory_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        let series = ConservedSeries {
            times: vec![0.0, 0.1],
            mass: vec![1.0, 1.0 + 1e-16],
            energy: vec![0.3, 0.1 / 3.0],
            norms: vec![(0.75, vec![2.0, 2.5])],
        };
        write_trajectory(&series, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,mass,energy,h_sigma_0.75\n"));
        assert_eq!(read_trajectory(&path).unwrap(), series);
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.lnf");
        std::fs::write(&path, [0u8; 40]).unwrap();
        assert!(read_field(&path).unwrap_err().to_string().contains("magic"));
    }
}
