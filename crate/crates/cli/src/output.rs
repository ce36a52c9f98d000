//! Self-describing output records and their CSV / JSON serialization.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use fdadm_core::montecarlo::{SweepMetric, SweepPoint, SweepResult};
use fdadm_core::precoder::AnMethod;

#[derive(Debug, Clone, PartialEq)]
pub struct OutputRecord {
    pub experiment: String,
    pub method: String,
    pub receiver: String,
    pub sweep_variable: String,
    pub sweep_unit: String,
    pub sweep_value: f64,
    pub metric: String,
    /// mc | analytic | lower_bound | upper_bound
    pub estimator: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub seed: u64,
    pub config_hash: String,
}

/// 17 significant digits, round-trip safe.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub const CSV_HEADER: &str = "experiment,method,receiver,sweep_variable,sweep_unit,sweep_value,metric,estimator,value,stderr,seed,config_hash";

impl OutputRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.method,
            self.receiver,
            self.sweep_variable,
            self.sweep_unit,
            fmt_f64(self.sweep_value),
            self.metric,
            self.estimator,
            fmt_f64(self.value),
            self.stderr.map(fmt_f64).unwrap_or_default(),
            self.seed,
            self.config_hash,
        )
    }

    pub fn json_object(&self) -> String {
        let mut s = String::from("{");
        let _ = write!(
            s,
            "\"experiment\":\"{}\",\"method\":\"{}\",\"receiver\":\"{}\",\
             \"sweep_variable\":\"{}\",\"sweep_unit\":\"{}\",\"sweep_value\":{},\
             \"metric\":\"{}\",\"estimator\":\"{}\",\"value\":{},",
            self.experiment,
            self.method,
            self.receiver,
            self.sweep_variable,
            self.sweep_unit,
            fmt_f64(self.sweep_value),
            self.metric,
            self.estimator,
            fmt_f64(self.value),
        );
        match self.stderr {
            Some(e) => {
                let _ = write!(s, "\"stderr\":{},", fmt_f64(e));
            }
            None => s.push_str("\"stderr\":null,"),
        }
        let _ = write!(
            s,
            "\"seed\":{},\"config_hash\":\"{}\"}}",
            self.seed, self.config_hash
        );
        s
    }
}

fn estimator_rank(e: &str) -> u8 {
    match e {
        "mc" => 0,
        "analytic" => 1,
        "lower_bound" => 2,
        "upper_bound" => 3,
        _ => 4,
    }
}

fn method_rank(m: &str) -> u8 {
    match m {
        "SP" => 0,
        "ZF" => 1,
        "SVD" => 2,
        "NoAN" => 3,
        _ => 4,
    }
}

/// Stable output order: sweep value, then method, then receiver, then
/// estimator — independent of how the sweep tasks completed.
pub fn sort_records(records: &mut [OutputRecord]) {
    records.sort_by(|a, b| {
        a.sweep_value
            .partial_cmp(&b.sweep_value)
            .unwrap()
            .then(method_rank(&a.method).cmp(&method_rank(&b.method)))
            .then(a.receiver.cmp(&b.receiver))
            .then(estimator_rank(&a.estimator).cmp(&estimator_rank(&b.estimator)))
    });
}

pub fn to_csv(records: &[OutputRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub fn to_json(records: &[OutputRecord]) -> String {
    let rows: Vec<String> = records.iter().map(|r| r.json_object()).collect();
    format!("[\n{}\n]\n", rows.join(",\n"))
}

/// Display conversion for swept values (angles are radians internally).
fn display_sweep_value(metric: SweepMetric, v: f64) -> f64 {
    match metric {
        SweepMetric::BerVsAzimuth | SweepMetric::BerVsElevation => v.to_degrees(),
        _ => v,
    }
}

fn bound_estimator(metric: SweepMetric) -> &'static str {
    match metric {
        SweepMetric::SrVsLambdaB | SweepMetric::SrVsLambdaE => "lower_bound",
        _ => "upper_bound",
    }
}

/// Flatten a sweep into records (one per defined estimator).
pub fn records_from_sweep(
    experiment: &str,
    result: &SweepResult,
    seed: u64,
    config_hash: &str,
) -> Vec<OutputRecord> {
    let (var, unit) = result.metric.sweep_variable();
    let metric_name = result.metric.metric_name();
    let mut out = Vec::new();
    let mut push = |p: &SweepPoint, estimator: &str, value: f64, stderr: Option<f64>| {
        out.push(OutputRecord {
            experiment: experiment.to_string(),
            method: p.method.label().to_string(),
            receiver: match (result.metric, p.receiver) {
                (SweepMetric::MemoryVsN | SweepMetric::MemoryVsL, _) => "-".to_string(),
                (_, tag) => tag.label().to_string(),
            },
            sweep_variable: var.to_string(),
            sweep_unit: unit.to_string(),
            sweep_value: display_sweep_value(result.metric, p.sweep_value),
            metric: metric_name.to_string(),
            estimator: estimator.to_string(),
            value,
            stderr,
            seed,
            config_hash: config_hash.to_string(),
        });
    };
    for p in &result.points {
        if let Some(mc) = p.mc_value {
            push(p, "mc", mc, p.mc_stderr);
        }
        if let Some(a) = p.analytic_value {
            push(p, "analytic", a, None);
        }
        if let Some(b) = p.bound_value {
            push(p, bound_estimator(result.metric), b, None);
        }
    }
    // memory sweeps additionally report the SP-to-method total ratios
    if matches!(
        result.metric,
        SweepMetric::MemoryVsN | SweepMetric::MemoryVsL
    ) {
        let sp_totals: Vec<(f64, f64)> = result
            .points
            .iter()
            .filter(|p| p.method == AnMethod::Sp)
            .map(|p| (p.sweep_value, p.analytic_value.unwrap()))
            .collect();
        for p in &result.points {
            if p.method == AnMethod::Sp || p.method == AnMethod::NoAn {
                continue;
            }
            if let Some(&(_, sp)) = sp_totals
                .iter()
                .find(|(v, _)| *v == p.sweep_value)
            {
                let total = p.analytic_value.unwrap();
                out.push(OutputRecord {
                    experiment: experiment.to_string(),
                    method: p.method.label().to_string(),
                    receiver: "-".to_string(),
                    sweep_variable: var.to_string(),
                    sweep_unit: unit.to_string(),
                    sweep_value: p.sweep_value,
                    metric: "memory_ratio_sp".to_string(),
                    estimator: "analytic".to_string(),
                    value: sp / total,
                    stderr: None,
                    seed,
                    config_hash: config_hash.to_string(),
                });
            }
        }
    }
    sort_records(&mut out);
    out
}

/// UTC timestamp `YYYYmmddTHHMMSSZ` without external dependencies.
pub fn utc_timestamp() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let days = (secs / 86_400) as i64;
    let tod = secs % 86_400;
    // civil-from-days (proleptic Gregorian)
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    let y = if m <= 2 { y + 1 } else { y };
    format!(
        "{:04}{:02}{:02}T{:02}{:02}{:02}Z",
        y,
        m,
        d,
        tod / 3600,
        (tod % 3600) / 60,
        tod % 60
    )
}

/// Parse one CSV row back into a record.
#[cfg(test)]
pub fn parse_csv_row(row: &str) -> Option<OutputRecord> {
    let cols: Vec<&str> = row.split(',').collect();
    if cols.len() != 12 {
        return None;
    }
    Some(OutputRecord {
        experiment: cols[0].to_string(),
        method: cols[1].to_string(),
        receiver: cols[2].to_string(),
        sweep_variable: cols[3].to_string(),
        sweep_unit: cols[4].to_string(),
        sweep_value: cols[5].parse().ok()?,
        metric: cols[6].to_string(),
        estimator: cols[7].to_string(),
        value: cols[8].parse().ok()?,
        stderr: if cols[9].is_empty() {
            None
        } else {
            Some(cols[9].parse().ok()?)
        },
        seed: cols[10].parse().ok()?,
        config_hash: cols[11].to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> OutputRecord {
        OutputRecord {
            experiment: "ber".into(),
            method: "SP".into(),
            receiver: "bob".into(),
            sweep_variable: "snr".into(),
            sweep_unit: "dB".into(),
            sweep_value: 10.0,
            metric: "ber".into(),
            estimator: "mc".into(),
            value: 2.1897654321098765e-3,
            stderr: Some(1.5e-5),
            seed: 42,
            config_hash: "0123456789abcdef".into(),
        }
    }

    #[test]
    fn csv_round_trip() {
        let r = sample();
        let parsed = parse_csv_row(&r.csv_row()).unwrap();
        assert_eq!(parsed, r);
        let mut none = r.clone();
        none.stderr = None;
        let parsed = parse_csv_row(&none.csv_row()).unwrap();
        assert_eq!(parsed, none);
    }

    #[test]
    fn sort_is_stable_and_total() {
        // pre-sort: (12, SP, mc), (10, SP, analytic), (10, ZF, mc);
        // sweep value dominates, then method, then estimator
        let mut rows = vec![sample(), sample(), sample()];
        rows[0].sweep_value = 12.0;
        rows[1].estimator = "analytic".into();
        rows[2].method = "ZF".into();
        sort_records(&mut rows);
        assert_eq!((rows[0].sweep_value, rows[0].method.as_str()), (10.0, "SP"));
        assert_eq!(rows[0].estimator, "analytic");
        assert_eq!((rows[1].sweep_value, rows[1].method.as_str()), (10.0, "ZF"));
        assert_eq!((rows[2].sweep_value, rows[2].method.as_str()), (12.0, "SP"));
    }

    #[test]
    fn timestamp_shape() {
        let t = utc_timestamp();
        assert_eq!(t.len(), 16);
        assert!(t.ends_with('Z'));
        assert!(&t[0..4] >= "2024");
    }

    #[test]
    fn json_is_well_formed_enough() {
        let rows = vec![sample()];
        let j = to_json(&rows);
        assert!(j.starts_with("[\n{"));
        assert!(j.contains("\"stderr\":1.5"));
        assert!(j.trim_end().ends_with(']'));
    }
}
