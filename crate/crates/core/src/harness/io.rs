//! CSV and JSON readers and writers.
//!
//! Every CSV starts with a `# schema_version: 1` comment line followed by a
//! header row. Readers skip `#` lines.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::lattice::{Observables, Trajectory};
use crate::scattering::{CircleGrid, SpectralData};
use crate::spectrum::{SpectrumSidecar, SCHEMA_VERSION};
use crate::{Error, LatticeState, Result, C64};

pub const STATE_HEADER: [&str; 3] = ["n", "re", "im"];
pub const TRAJECTORY_HEADER: [&str; 4] = ["t", "n", "re", "im"];
pub const OBSERVABLES_HEADER: [&str; 4] = ["t", "c_infty", "l2_norm", "l21_norm"];
pub const SPECTRAL_HEADER: [&str; 7] = ["theta", "re_a", "im_a", "re_b", "im_b", "re_r", "im_r"];
pub const FIELD_HEADER: [&str; 3] = ["n", "re_q", "im_q"];
pub const RAY_HEADER: [&str; 7] = ["t", "n", "re_pred", "im_pred", "re_sim", "im_sim", "abs_err"];
pub const T_DUMP_HEADER: [&str; 4] = ["re_lambda", "im_lambda", "re_T", "im_T"];

/// One row of a ray comparison file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayRow {
    pub t: f64,
    pub n: i64,
    pub pred: C64,
    pub sim: C64,
}

impl RayRow {
    pub fn abs_err(&self) -> f64 {
        (self.pred - self.sim).norm()
    }
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

/// CSV writer that has already emitted the schema line and `header`.
pub fn csv_writer<W: Write>(mut w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    writeln!(w, "# schema_version: {SCHEMA_VERSION}")?;
    let mut out = csv::WriterBuilder::new().from_writer(w);
    out.write_record(header)?;
    Ok(out)
}

fn csv_reader<R: Read>(r: R, header: &[&str]) -> Result<csv::Reader<R>> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
    let got = rd.headers()?.clone();
    if got.len() != header.len() || got.iter().zip(header).any(|(a, b)| a != *b) {
        return Err(Error::invalid(format!("expected CSV header {}, found {}", header.join(","), got.iter().collect::<Vec<_>>().join(","))));
    }
    Ok(rd)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, k: usize) -> Result<T> {
    let s = rec.get(k).ok_or_else(|| Error::invalid(format!("missing column {k}")))?;
    s.parse().map_err(|_| Error::invalid(format!("cannot parse {s:?} in column {k}")))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?))
}

pub fn write_state<W: Write>(w: W, state: &LatticeState) -> Result<()> {
    let mut out = csv_writer(w, &STATE_HEADER)?;
    for (k, z) in state.q.iter().enumerate() {
        out.write_record([(state.n0 + k as i64).to_string(), fmt(z.re), fmt(z.im)])?;
    }
    out.flush()?;
    Ok(())
}

/// Read `n,re,im` rows. Sites may come in any order; gaps are zero-filled.
pub fn read_state<R: Read>(r: R) -> Result<LatticeState> {
    let mut rows: Vec<(i64, C64)> = Vec::new();
    for rec in csv_reader(r, &STATE_HEADER)?.records() {
        let rec = rec?;
        rows.push((field(&rec, 0)?, C64::new(field(&rec, 1)?, field(&rec, 2)?)));
    }
    if rows.is_empty() {
        return Err(Error::invalid("initial data CSV has no rows"));
    }
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::invalid(format!("site {} appears twice", w[0].0)));
    }
    let (lo, hi) = (rows[0].0, rows[rows.len() - 1].0);
    let mut state = LatticeState::zeros(lo, hi, 0.0)?;
    for (n, z) in rows {
        state.q[(n - lo) as usize] = z;
    }
    state.validate()?;
    Ok(state)
}

pub fn write_trajectory<W: Write>(w: W, traj: &Trajectory) -> Result<()> {
    let mut out = csv_writer(w, &TRAJECTORY_HEADER)?;
    for s in &traj.states {
        for (k, z) in s.q.iter().enumerate() {
            out.write_record([fmt(s.t), (s.n0 + k as i64).to_string(), fmt(z.re), fmt(z.im)])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_observables<W: Write>(w: W, obs: &[Observables]) -> Result<()> {
    let mut out = csv_writer(w, &OBSERVABLES_HEADER)?;
    for o in obs {
        out.write_record([fmt(o.t), fmt(o.c_infty), fmt(o.l2_norm), fmt(o.l21_norm)])?;
    }
    out.flush()?;
    Ok(())
}

/// Samples of `a`, `b`, `r` on the grid; the spectrum and `c₋∞` go to the
/// JSON sidecar.
pub fn write_spectral<W: Write>(w: W, data: &SpectralData) -> Result<()> {
    let mut out = csv_writer(w, &SPECTRAL_HEADER)?;
    for (k, th) in data.grid.thetas.iter().enumerate() {
        let (a, b, r) = (data.a_vals[k], data.b_vals[k], data.r_vals[k]);
        out.write_record([fmt(*th), fmt(a.re), fmt(a.im), fmt(b.re), fmt(b.im), fmt(r.re), fmt(r.im)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_spectral<R: Read>(csv_in: R, sidecar: &SpectrumSidecar) -> Result<SpectralData> {
    let (mut thetas, mut a_vals, mut b_vals, mut r_vals) = (vec![], vec![], vec![], vec![]);
    for rec in csv_reader(csv_in, &SPECTRAL_HEADER)?.records() {
        let rec = rec?;
        thetas.push(field(&rec, 0)?);
        a_vals.push(C64::new(field(&rec, 1)?, field(&rec, 2)?));
        b_vals.push(C64::new(field(&rec, 3)?, field(&rec, 4)?));
        r_vals.push(C64::new(field(&rec, 5)?, field(&rec, 6)?));
    }
    Ok(SpectralData {
        grid: CircleGrid::from_thetas(thetas)?,
        a_vals,
        b_vals,
        r_vals,
        c_inf: sidecar.c_inf,
        spectrum: sidecar.to_spectrum()?,
    })
}

pub fn write_field<W: Write>(w: W, n_min: i64, values: &[C64]) -> Result<()> {
    let mut out = csv_writer(w, &FIELD_HEADER)?;
    for (k, z) in values.iter().enumerate() {
        out.write_record([(n_min + k as i64).to_string(), fmt(z.re), fmt(z.im)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_ray<W: Write>(w: W, rows: &[RayRow]) -> Result<()> {
    let mut out = csv_writer(w, &RAY_HEADER)?;
    for r in rows {
        out.write_record([
            fmt(r.t),
            r.n.to_string(),
            fmt(r.pred.re),
            fmt(r.pred.im),
            fmt(r.sim.re),
            fmt(r.sim.im),
            fmt(r.abs_err()),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_t_dump<W: Write>(w: W, rows: &[(C64, C64)]) -> Result<()> {
    let mut out = csv_writer(w, &T_DUMP_HEADER)?;
    for (l, t) in rows {
        out.write_record([fmt(l.re), fmt(l.im), fmt(t.re), fmt(t.im)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_json<R: Read, T: DeserializeOwned>(r: R) -> Result<T> {
    Ok(serde_json::from_reader(r)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;
    use crate::scattering::transfer_scattering;
    use crate::spectrum::DiscreteSpectrum;

    #[test]
    fn state_round_trip_is_exact() {
        let s = LatticeState::from_fn(-3, 4, 0.0, |n| c(0.1 * n as f64 + 1.0 / 3.0, -1e-300 * n as f64)).unwrap();
        let mut buf = Vec::new();
        write_state(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# schema_version: 1\nn,re,im\n"));
        let back = read_state(buf.as_slice()).unwrap();
        assert_eq!(back.n0, -3);
        assert_eq!(back.q, s.q);
    }

    #[test]
    fn sparse_rows_are_zero_filled() {
        let text = "n,re,im\n2,1.0,0\n-1,0,0.5\n";
        let s = read_state(text.as_bytes()).unwrap();
        assert_eq!(s.n0, -1);
        assert_eq!(s.q, vec![c(0.0, 0.5), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(read_state("n,re,im\n1,0,0\n1,1,1\n".as_bytes()).is_err());
        assert!(read_state("n,re\n1,0\n".as_bytes()).is_err());
        assert!(read_state("n,re,im\n1,nan,0\n".as_bytes()).is_err());
    }

    #[test]
    fn spectral_round_trip() {
        let s = LatticeState::from_fn(-4, 4, 0.0, |n| c(0.2 / (1.0 + (n * n) as f64), 0.05)).unwrap();
        let data = transfer_scattering(&s, &CircleGrid::uniform(16).unwrap()).unwrap();
        let side = SpectrumSidecar::from_spectrum(&DiscreteSpectrum::empty(), data.c_inf);
        let mut buf = Vec::new();
        write_spectral(&mut buf, &data).unwrap();
        let back = read_spectral(buf.as_slice(), &side).unwrap();
        assert_eq!(back.r_vals, data.r_vals);
        assert_eq!(back.grid.thetas, data.grid.thetas);
        assert_eq!(back.c_inf, data.c_inf);
    }

    #[test]
    fn ray_rows_carry_the_error() {
        let rows = [RayRow { t: 50.0, n: 30, pred: c(0.0, 0.0), sim: c(3.0, 4.0) }];
        let mut buf = Vec::new();
        write_ray(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(2).unwrap(), "5e1,30,0e0,0e0,3e0,4e0,5e0");
    }
}
