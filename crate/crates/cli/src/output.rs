//! CSV rows and the metadata file written next to them.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dyncorr::C64;

pub const HEADER: &str = "lambda,n,seed,re_C,im_C,re_Cn,im_Cn,eps_sys_rel,eps_stat_rel,eps_tot_rel,measured_rel";
pub const HEADER_2D: &str = "lambda,lambda2,n,seed,re_C,im_C,re_Cn,im_Cn,eps_sys_rel,eps_stat_rel,eps_tot_rel,measured_rel";
pub const COMPARE_HEADER: &str = "target,protocol,exponent,prefactor,r_squared,n_per_sample,samples,total_measurements";

/// 17 significant digits, so every value reads back to the same bits.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

/// One row of the common schema; `None` prints as an empty field.
#[derive(Clone, Debug, Default)]
pub struct Row {
    pub lambda: Option<f64>,
    pub lambda2: Option<f64>,
    pub n: Option<f64>,
    pub seed: Option<u64>,
    pub c: C64,
    pub re_cn: Option<f64>,
    pub im_cn: Option<f64>,
    pub sys: Option<f64>,
    pub stat: Option<f64>,
    pub tot: Option<f64>,
    pub measured: Option<f64>,
}

impl Row {
    pub fn sampled(mut self, cn: Option<C64>) -> Self {
        self.re_cn = cn.map(|c| c.re);
        self.im_cn = cn.map(|c| c.im);
        self
    }
}

/// Sample sizes are integers in every command, but sweeps carry them as floats.
fn count(n: Option<f64>) -> String {
    match n {
        Some(n) if n.fract() == 0.0 && n.abs() < 1e18 => format!("{}", n as u64),
        other => opt(other),
    }
}

pub fn table(rows: &[Row], two_couplings: bool) -> String {
    let mut out = String::new();
    out.push_str(if two_couplings { HEADER_2D } else { HEADER });
    out.push('\n');
    for r in rows {
        let mut fields = vec![opt(r.lambda)];
        if two_couplings {
            fields.push(opt(r.lambda2));
        }
        fields.extend([
            count(r.n),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
            float(r.c.re),
            float(r.c.im),
            opt(r.re_cn),
            opt(r.im_cn),
            opt(r.sys),
            opt(r.stat),
            opt(r.tot),
            opt(r.measured),
        ]);
        writeln!(out, "{}", fields.join(",")).unwrap();
    }
    out
}

/// `results.csv` gets `results.json`; other names get `.json` appended.
pub fn metadata_path(csv: &Path) -> PathBuf {
    match csv.extension() {
        Some(ext) if ext == "csv" => csv.with_extension("json"),
        _ => {
            let mut s = csv.as_os_str().to_owned();
            s.push(".json");
            PathBuf::from(s)
        }
    }
}

/// Writes both files, or neither.
pub fn write_pair(csv_path: &Path, csv: &str, metadata: &str) -> std::io::Result<()> {
    let meta_path = metadata_path(csv_path);
    std::fs::write(csv_path, csv)?;
    if let Err(e) = std::fs::write(&meta_path, metadata) {
        let _ = std::fs::remove_file(csv_path);
        return Err(e);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23] {
            assert_eq!(float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn blanks_for_missing_fields() {
        let row = Row {
            c: C64::new(0.5, -0.25),
            ..Row::default()
        };
        let csv = table(&[row], false);
        let line = csv.lines().nth(1).unwrap();
        assert_eq!(line, ",,,5.0000000000000000e-1,-2.5000000000000000e-1,,,,,,");
        assert_eq!(line.split(',').count(), HEADER.split(',').count());
    }

    #[test]
    fn metadata_next_to_csv() {
        assert_eq!(metadata_path(Path::new("out/run.csv")), PathBuf::from("out/run.json"));
        assert_eq!(metadata_path(Path::new("run.dat")), PathBuf::from("run.dat.json"));
    }
}
