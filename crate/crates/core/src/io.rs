//! External file formats.
//!
//! - Density matrices: JSON with `basis_order` labels plus `re`/`im` 4x4
//!   row-major arrays; loading permutes into the canonical (HH, HV, VH, VV)
//!   order by label. Round trips are bit exact.
//! - Time tags: little-endian binary records of `(u8 channel, u64 time_ns)`
//!   merged in time order, with a `channel,time_ns` CSV alternative.
//! - Histograms, waveforms, and phase traces: plot-ready CSV.

use crate::coincidence::{Channel, CoincidenceHistogram, TimeTagStream};
use crate::error::{Error, Result};
use crate::linalg::Mat4;
use crate::optics::{AnalyzerChain, PbsPort};
use crate::phaselock::PhaseTrace;
use crate::quantum::{DensityMatrix, BASIS_LABELS};
use crate::scalar::C;
use crate::spectrum::{BiphotonSpectrum, TemporalWaveform};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::Path;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

// ---------------------------------------------------------------------------
// Density matrix JSON
// ---------------------------------------------------------------------------

/// On-disk density matrix: labeled basis plus real/imaginary parts.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DensityMatrixFile {
    pub basis_order: Vec<String>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl DensityMatrixFile {
    /// Serialize a canonical-order matrix.
    pub fn from_matrix(m: &Mat4<f64>) -> Self {
        let re = (0..4)
            .map(|i| (0..4).map(|j| m.m[i][j].re).collect())
            .collect();
        let im = (0..4)
            .map(|i| (0..4).map(|j| m.m[i][j].im).collect())
            .collect();
        Self {
            basis_order: BASIS_LABELS.iter().map(|s| s.to_string()).collect(),
            re,
            im,
        }
    }

    /// Permutation sending file row/column `i` to its canonical position.
    fn permutation(&self) -> Result<[usize; 4]> {
        if self.basis_order.len() != 4 {
            return Err(Error::InvalidBasisOrder {
                got: self.basis_order.clone(),
            });
        }
        let mut perm = [usize::MAX; 4];
        for (i, label) in self.basis_order.iter().enumerate() {
            let canon = BASIS_LABELS
                .iter()
                .position(|l| l.eq_ignore_ascii_case(label))
                .ok_or_else(|| Error::UnknownBasisLabel {
                    label: label.clone(),
                })?;
            if perm.contains(&canon) {
                return Err(Error::InvalidBasisOrder {
                    got: self.basis_order.clone(),
                });
            }
            perm[i] = canon;
        }
        Ok(perm)
    }

    /// Reconstruct the matrix in canonical basis order.
    pub fn to_canonical_matrix(&self) -> Result<Mat4<f64>> {
        let shape_ok = self.re.len() == 4
            && self.im.len() == 4
            && self.re.iter().all(|r| r.len() == 4)
            && self.im.iter().all(|r| r.len() == 4);
        if !shape_ok {
            return Err(Error::Format {
                what: "density matrix file",
                reason: "re and im must be 4x4".into(),
            });
        }
        let perm = self.permutation()?;
        let mut m = Mat4::zero();
        for i in 0..4 {
            for j in 0..4 {
                m.m[perm[i]][perm[j]] = C::new(self.re[i][j], self.im[i][j]);
            }
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("density file serializes")
    }

    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Format {
            what: "density matrix JSON",
            reason: e.to_string(),
        })
    }
}

/// Load a density matrix file, permute it to canonical order, and ingest it
/// (validation diagnostics, no repair).
pub fn parse_density_matrix(json: &str) -> Result<DensityMatrix<f64>> {
    let file = DensityMatrixFile::parse(json)?;
    Ok(DensityMatrix::ingest(file.to_canonical_matrix()?))
}

pub fn write_density_matrix(path: &Path, rho: &DensityMatrix<f64>) -> Result<()> {
    let file = DensityMatrixFile::from_matrix(rho.matrix());
    std::fs::write(path, file.to_json()).map_err(|e| io_err(path, e))
}

pub fn read_density_matrix(path: &Path) -> Result<DensityMatrix<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_density_matrix(&text)
}

// ---------------------------------------------------------------------------
// Time tags
// ---------------------------------------------------------------------------

/// One detection event in the merged on-disk representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TimeTagRecord {
    pub channel: u8,
    pub time_ns: u64,
}

/// Merge two channel streams into time-ordered records (ties: Stokes first).
pub fn merge_streams(stokes: &TimeTagStream, anti_stokes: &TimeTagStream) -> Vec<TimeTagRecord> {
    let mut records: Vec<TimeTagRecord> = stokes
        .times()
        .iter()
        .map(|&t| TimeTagRecord {
            channel: Channel::Stokes as u8,
            time_ns: t,
        })
        .chain(anti_stokes.times().iter().map(|&t| TimeTagRecord {
            channel: Channel::AntiStokes as u8,
            time_ns: t,
        }))
        .collect();
    records.sort_by_key(|r| (r.time_ns, r.channel));
    records
}

/// Split merged records back into per-channel streams, validating order.
pub fn split_records(records: &[TimeTagRecord]) -> Result<(TimeTagStream, TimeTagStream)> {
    let mut last = 0u64;
    for (i, r) in records.iter().enumerate() {
        if r.time_ns < last {
            return Err(Error::UnsortedStream { index: i });
        }
        if r.channel > 1 {
            return Err(Error::Format {
                what: "time-tag record",
                reason: format!("channel {} out of range at index {i}", r.channel),
            });
        }
        last = r.time_ns;
    }
    let stokes: Vec<u64> = records
        .iter()
        .filter(|r| r.channel == Channel::Stokes as u8)
        .map(|r| r.time_ns)
        .collect();
    let anti: Vec<u64> = records
        .iter()
        .filter(|r| r.channel == Channel::AntiStokes as u8)
        .map(|r| r.time_ns)
        .collect();
    Ok((
        TimeTagStream::new(Channel::Stokes, stokes)?,
        TimeTagStream::new(Channel::AntiStokes, anti)?,
    ))
}

/// Encode records as little-endian `(u8, u64)` pairs.
pub fn timetags_to_bytes(records: &[TimeTagRecord]) -> Vec<u8> {
    let mut out = Vec::with_capacity(records.len() * 9);
    for r in records {
        out.push(r.channel);
        out.extend_from_slice(&r.time_ns.to_le_bytes());
    }
    out
}

pub fn timetags_from_bytes(bytes: &[u8]) -> Result<Vec<TimeTagRecord>> {
    if !bytes.len().is_multiple_of(9) {
        return Err(Error::Format {
            what: "time-tag binary",
            reason: format!("length {} is not a multiple of 9", bytes.len()),
        });
    }
    Ok(bytes
        .chunks_exact(9)
        .map(|c| TimeTagRecord {
            channel: c[0],
            time_ns: u64::from_le_bytes(c[1..9].try_into().expect("8 bytes")),
        })
        .collect())
}

pub fn write_timetags_binary(path: &Path, records: &[TimeTagRecord]) -> Result<()> {
    std::fs::write(path, timetags_to_bytes(records)).map_err(|e| io_err(path, e))
}

pub fn read_timetags_binary(path: &Path) -> Result<Vec<TimeTagRecord>> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    timetags_from_bytes(&bytes)
}

pub fn write_timetags_csv(path: &Path, records: &[TimeTagRecord]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = std::io::BufWriter::new(f);
    writeln!(w, "channel,time_ns").map_err(|e| io_err(path, e))?;
    for r in records {
        writeln!(w, "{},{}", r.channel, r.time_ns).map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

pub fn read_timetags_csv(path: &Path) -> Result<Vec<TimeTagRecord>> {
    let f = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let reader = std::io::BufReader::new(f);
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("channel")) {
            continue;
        }
        let mut parts = line.split(',');
        let (ch, t) = (parts.next(), parts.next());
        let parsed = ch.zip(t).and_then(|(c, t)| {
            Some(TimeTagRecord {
                channel: c.trim().parse().ok()?,
                time_ns: t.trim().parse().ok()?,
            })
        });
        match parsed {
            Some(r) => out.push(r),
            None => {
                return Err(Error::Format {
                    what: "time-tag CSV",
                    reason: format!("line {}: {line:?}", lineno + 1),
                })
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Plot-data CSV
// ---------------------------------------------------------------------------

pub fn histogram_to_csv(hist: &CoincidenceHistogram) -> String {
    let mut out = String::from("tau_ns,counts,g2\n");
    let g2 = hist.g2();
    for (k, (&c, g)) in hist.counts.iter().zip(g2.iter()).enumerate() {
        out.push_str(&format!("{},{},{}\n", hist.tau_center_ns(k), c, g));
    }
    out
}

pub fn waveform_to_csv(wf: &TemporalWaveform<f64>) -> String {
    let mut out = String::from("time_ns,real,imag\n");
    for (j, z) in wf.samples().iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", wf.time_ns(j), z.re, z.im));
    }
    out
}

pub fn spectrum_to_csv(spec: &BiphotonSpectrum<f64>) -> String {
    let mut out = String::from("detuning_mhz,real,imag\n");
    let to_mhz = 1e3 / (2.0 * std::f64::consts::PI);
    for (k, z) in spec.amplitudes().iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            spec.grid().detuning(k) * to_mhz,
            z.re,
            z.im
        ));
    }
    out
}

pub fn phase_trace_to_csv(trace: &PhaseTrace<f64>) -> String {
    let mut out = String::from("t_ms,phi_lock_rad,phi_rad\n");
    for s in trace.samples() {
        out.push_str(&format!("{},{},{}\n", s.t_ms, s.phi_lock_rad, s.phi_rad));
    }
    out
}

// ---------------------------------------------------------------------------
// Analyzer settings JSON
// ---------------------------------------------------------------------------

/// Waveplate angles (degrees) and PBS port of one analyzer arm.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AnalyzerSettings {
    pub qwp_deg: f64,
    pub hwp_deg: f64,
    pub port: PortSetting,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum PortSetting {
    Transmit,
    Reflect,
}

impl From<PortSetting> for PbsPort {
    fn from(p: PortSetting) -> Self {
        match p {
            PortSetting::Transmit => PbsPort::Transmit,
            PortSetting::Reflect => PbsPort::Reflect,
        }
    }
}

impl AnalyzerSettings {
    pub fn chain(&self) -> AnalyzerChain<f64> {
        AnalyzerChain::qwp_hwp(
            self.qwp_deg.to_radians(),
            self.hwp_deg.to_radians(),
            self.port.into(),
        )
    }
}
