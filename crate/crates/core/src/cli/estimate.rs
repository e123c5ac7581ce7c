//! `crit estimate`: CSV tables from sample archives.

use std::io::Write;
use std::path::{Path, PathBuf};

use super::archive::{fmt_f64, Manifest, SampleRecord, Snapshot};
use crate::clusters::{block_one_arm_event, block_sums, block_variables, cutoff_split, xy_discrepancy};
use crate::error::{invalid, Result};
use crate::estimators::{
    batch_mean, beta_epsilon, char_function_check, jackknife, kpoint_scaled, kpoint_sites, ks_two_sample,
    mgf_concavity_check, moments, one_arm_alpha1, one_arm_inner_block, riesz_variance_integral, two_point_rho,
    Estimate,
};
use crate::lattice::{build_lattice, LatticeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Kind {
    TwoPoint,
    OneArm,
    Moments,
    Mgf,
    Charfun,
    Kpoint,
    Sobolev,
    Blocks,
    Cutoff,
    Ks,
    Riesz,
}

/// Tuning knobs of the individual kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateOptions {
    /// k-point locations in the unit square.
    pub points: Vec<(f64, f64)>,
    pub rho_inv: usize,
    pub eps_inv: usize,
    pub exponent: f64,
    pub mgf_step: f64,
    pub mgf_t_max: f64,
    pub charfun_k_max: usize,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            points: vec![(0.25, 0.25), (0.75, 0.75)],
            rho_inv: 2,
            eps_inv: 4,
            exponent: 0.25,
            mgf_step: 0.1,
            mgf_t_max: 3.0,
            charfun_k_max: 8,
        }
    }
}

pub const HEADER: [&str; 7] = ["quantity", "n_side", "parameter", "estimate", "stderr", "samples", "anchor"];

/// One output row.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Row {
    pub quantity: String,
    pub n_side: Option<usize>,
    pub parameter: String,
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
    pub anchor: String,
}

impl Row {
    fn new(quantity: &str, n_side: Option<usize>, parameter: String, e: Estimate, anchor: &str) -> Self {
        Row {
            quantity: quantity.into(),
            n_side,
            parameter,
            estimate: e.value,
            stderr: e.stderr,
            samples: e.n,
            anchor: anchor.into(),
        }
    }
}

pub fn write_rows<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            r.quantity.clone(),
            r.n_side.map(|n| n.to_string()).unwrap_or_default(),
            r.parameter.clone(),
            fmt_f64(r.estimate),
            fmt_f64(r.stderr),
            r.samples.to_string(),
            r.anchor.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: std::io::Read>(input: R) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}

fn archive_records(dir: &Path) -> Result<(Manifest, Vec<(usize, Vec<SampleRecord>)>)> {
    let m = Manifest::load(dir)?;
    let recs = m.records(dir)?;
    Ok((m, recs))
}

fn archive_snapshots(dir: &Path) -> Result<(Manifest, Vec<(usize, Vec<Snapshot>)>)> {
    let m = Manifest::load(dir)?;
    let snaps = m.snapshots(dir)?;
    if snaps.is_empty() {
        return invalid(format!("{} holds no snapshots; rerun sampling with snapshots enabled", dir.display()));
    }
    Ok((m, snaps))
}

fn column(recs: &[SampleRecord], f: impl Fn(&SampleRecord) -> f64) -> Vec<f64> {
    recs.iter().map(f).collect()
}

fn one_input(kind: Kind, inputs: &[PathBuf]) -> Result<&Path> {
    match inputs {
        [p] => Ok(p),
        _ => invalid(format!("{kind:?} takes exactly one archive directory, got {}", inputs.len())),
    }
}

fn restore_all(spec: &LatticeSpec, snaps: &[Snapshot]) -> Result<Vec<(crate::sampler::SpinConfig, crate::sampler::ColoredBonds)>> {
    snaps.iter().map(|s| s.restore(spec)).collect()
}

pub fn run_estimate(kind: Kind, inputs: &[PathBuf], opts: &EstimateOptions) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    match kind {
        Kind::Riesz => {
            if !inputs.is_empty() {
                return invalid("riesz takes no inputs");
            }
            let v = riesz_variance_integral(opts.exponent)?;
            rows.push(Row::new("riesz_integral", None, format!("s={}", opts.exponent), Estimate::exact(v), "Riesz integral of |x-y|^-s"));
        }
        Kind::Ks => {
            let [a, b] = inputs else {
                return invalid(format!("ks takes two archive directories, got {}", inputs.len()));
            };
            let (_, ra) = archive_records(a)?;
            let (_, rb) = archive_records(b)?;
            let (Some((na, xa)), Some((nb, xb))) = (ra.first(), rb.first()) else {
                return invalid("ks needs samples in both archives");
            };
            let ks = ks_two_sample(&column(xa, |r| r.magnetization), &column(xb, |r| r.magnetization))?;
            rows.push(Row {
                quantity: "ks_distance".into(),
                n_side: None,
                parameter: format!("N1={na};N2={nb};n1={};n2={}", ks.n1, ks.n2),
                estimate: ks.d,
                stderr: ((ks.n1 + ks.n2) as f64 / (ks.n1 * ks.n2) as f64).sqrt(),
                samples: ks.n1 + ks.n2,
                anchor: "KS distance of renormalized magnetizations".into(),
            });
        }
        Kind::TwoPoint | Kind::OneArm | Kind::Moments | Kind::Mgf | Kind::Charfun | Kind::Sobolev => {
            let (_, sides) = archive_records(one_input(kind, inputs)?)?;
            for (n, recs) in &sides {
                let n = *n;
                match kind {
                    Kind::TwoPoint => {
                        let sep = recs.first().map_or(n / 4, |r| r.pair_separation);
                        let conn = two_point_rho(sep, n, &column(recs, |r| r.pair_connected as f64))?;
                        let prod = two_point_rho(sep, n, &column(recs, |r| r.pair_product as f64))?;
                        rows.push(Row::new("rho_connectivity", Some(n), format!("N={sep}"), conn, "rho(N)"));
                        rows.push(Row::new("rho_spin_product", Some(n), format!("N={sep}"), prod, "rho(N)"));
                    }
                    Kind::OneArm => {
                        let e = batch_mean(&column(recs, |r| r.center_one_arm));
                        rows.push(Row::new("alpha1_center", Some(n), "center".into(), e, "alpha1(N)"));
                        let g = batch_mean(&column(recs, |r| r.center_ghost));
                        rows.push(Row::new("center_ghost", Some(n), "center".into(), g, "<sigma_center>"));
                    }
                    Kind::Moments => {
                        let m = moments(&column(recs, |r| r.magnetization))?;
                        rows.push(Row::new("mean", Some(n), String::new(), m.mean, "E[m]"));
                        rows.push(Row::new("variance", Some(n), String::new(), m.variance, "Var(m)"));
                        if let Some(s) = m.skewness {
                            rows.push(Row::new("skewness", Some(n), String::new(), s, "skewness of m"));
                        }
                        if let Some(k) = m.kurtosis_ratio {
                            rows.push(Row::new("kurtosis_ratio", Some(n), String::new(), k, "E[m^4]/(3 E[m^2]^2)"));
                        }
                        for (k, e) in m.raw.iter().enumerate() {
                            rows.push(Row::new("raw_moment", Some(n), format!("k={}", k + 1), *e, "E[m^k]"));
                        }
                    }
                    Kind::Mgf => {
                        let xs = column(recs, |r| r.magnetization);
                        for d in mgf_concavity_check(&xs, opts.mgf_step, opts.mgf_t_max)? {
                            let e = Estimate { value: d.value, stderr: d.stderr, n: xs.len(), flagged: false };
                            rows.push(Row::new("mgf_third_difference", Some(n), format!("t={}", d.t), e, "third derivative of log E[e^{tm}]"));
                        }
                    }
                    Kind::Charfun => {
                        let xs = column(recs, |r| r.magnetization);
                        let grid: Vec<f64> = (0..=10).map(|i| 0.5 * i as f64).collect();
                        let c = char_function_check(&xs, &grid, opts.charfun_k_max)?;
                        let param = format!("k_max={};consistent={}", opts.charfun_k_max, c.consistent());
                        let e = Estimate { value: c.max_discrepancy, stderr: c.stat_error, n: xs.len(), flagged: false };
                        rows.push(Row::new("charfun_discrepancy", Some(n), param.clone(), e, "E[e^{itm}] vs moment series"));
                        rows.push(Row::new("charfun_truncation", Some(n), param, Estimate::exact(c.truncation_bound), "moment series remainder"));
                    }
                    Kind::Sobolev => {
                        if recs.iter().any(|r| r.sobolev.is_none()) {
                            return invalid("archive has no Sobolev column; set sobolev_alpha in the run config");
                        }
                        let e = batch_mean(&column(recs, |r| r.sobolev.unwrap_or(f64::NAN)));
                        rows.push(Row::new("sobolev_norm_sq", Some(n), String::new(), e, "E||Phi||^2_{H^-alpha}"));
                    }
                    _ => unreachable!(),
                }
            }
        }
        Kind::Kpoint | Kind::Blocks | Kind::Cutoff => {
            let (m, sides) = archive_snapshots(one_input(kind, inputs)?)?;
            let scheme = m.config.renorm;
            for (n, snaps) in &sides {
                let spec = build_lattice(*n, m.config.boundary)?;
                let configs = restore_all(&spec, snaps)?;
                match kind {
                    Kind::Kpoint => {
                        let sites = kpoint_sites(*n, &opts.points)?;
                        let products: Vec<f64> = configs
                            .iter()
                            .map(|(s, _)| sites.iter().map(|&v| s.get(v) as f64).product())
                            .collect();
                        let e = kpoint_scaled(&products, sites.len(), spec.mesh(), &scheme)?;
                        let param = opts.points.iter().map(|(x, y)| format!("({x},{y})")).collect::<Vec<_>>().join(";");
                        rows.push(Row::new("kpoint", Some(*n), param, e, "renormalized k-point function"));
                    }
                    Kind::Blocks => {
                        let inner = one_arm_inner_block(*n, opts.eps_inv)?;
                        let hits: Vec<f64> = match &inner {
                            Some(q) => configs.iter().map(|(_, c)| block_one_arm_event(&spec, c.labels(), q) as u8 as f64).collect(),
                            None => Vec::new(),
                        };
                        let alpha = one_arm_alpha1(*n, opts.eps_inv, &hits)?;
                        let beta = beta_epsilon(opts.eps_inv, alpha.value)?;
                        let mut obs = Vec::new();
                        for (_, c) in &configs {
                            obs.extend(block_sums(&block_variables(&spec, c, opts.rho_inv, opts.eps_inv, &scheme)?));
                        }
                        let fit = xy_discrepancy(&obs, beta)?;
                        let param = format!("rho=1/{};eps=1/{}", opts.rho_inv, opts.eps_inv);
                        rows.push(Row::new("alpha1_annulus", Some(*n), param.clone(), alpha, "alpha1(eps,1)"));
                        rows.push(Row::new("beta_eps", Some(*n), param.clone(), Estimate::exact(beta), "beta(eps)"));
                        if let Some(c) = fit.c_hat {
                            rows.push(Row::new("c_hat", Some(*n), param.clone(), Estimate::exact(c), "fitted c"));
                        }
                        let e = Estimate { value: fit.discrepancy, stderr: fit.stderr, n: fit.observations, flagged: false };
                        rows.push(Row::new("block_discrepancy", Some(*n), param, e, "||sum X - c beta(eps) sum Y||_2"));
                    }
                    Kind::Cutoff => {
                        let theta = scheme.theta(spec.mesh())?;
                        let mut rho_inv = 2;
                        while rho_inv <= *n / 2 {
                            let rest: Vec<f64> = configs
                                .iter()
                                .map(|(_, c)| cutoff_split(&spec, c, rho_inv).map(|(_, r)| theta * r as f64))
                                .collect::<Result<_>>()?;
                            let e = jackknife(&rest, |p| p.raw(2).sqrt());
                            rows.push(Row::new("cutoff_error", Some(*n), format!("rho=1/{rho_inv}"), e, "||m - m_rho||_2"));
                            rho_inv *= 2;
                        }
                    }
                    _ => unreachable!(),
                }
            }
        }
    }
    Ok(rows)
}

/// Parses k-point locations written as `x,y;x,y`.
pub fn parse_points(text: &str) -> Result<Vec<(f64, f64)>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let mut it = pair.split(',').map(|v| v.trim().parse::<f64>());
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(x)), Some(Ok(y)), None) => Ok((x, y)),
                _ => invalid(format!("bad point {pair:?}; expected x,y")),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riesz_row_without_inputs() {
        let rows = run_estimate(Kind::Riesz, &[], &EstimateOptions::default()).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].estimate - 1.2392596325485772698).abs() < 1e-10);
        assert!(run_estimate(Kind::Riesz, &[PathBuf::from("x")], &EstimateOptions::default()).is_err());
    }

    #[test]
    fn rows_round_trip_through_csv() {
        let rows = vec![
            Row::new("a", Some(8), "N=2".into(), Estimate { value: 0.1 + 0.2, stderr: 1e-17, n: 5, flagged: false }, "rho(N)"),
            Row::new("b", None, String::new(), Estimate::exact(std::f64::consts::PI), "x, y"),
        ];
        let mut buf = Vec::new();
        write_rows(&rows, &mut buf).unwrap();
        assert_eq!(read_rows(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn point_lists_parse() {
        assert_eq!(parse_points("0.25,0.5; 0.75,0.5").unwrap(), vec![(0.25, 0.5), (0.75, 0.5)]);
        assert!(parse_points("0.1").is_err());
        assert!(parse_points("a,b").is_err());
    }
}
