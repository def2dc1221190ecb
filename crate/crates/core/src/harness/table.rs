//! Tables of bound formulas.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::svg::Series;
use crate::analysis::{
    lower_bound, upper_bound, BoundQuery, LowerBoundKind, PhiFamily, UpperBoundKind,
};
use crate::error::Result;

/// One labeled bound value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEntry {
    pub side: &'static str,
    pub name: String,
    pub value: f64,
}

/// Every bound that applies to `q`.
pub fn bounds_report(q: &BoundQuery) -> Result<Vec<BoundEntry>> {
    let mut out = Vec::new();
    let mut up = |name: &str, v: f64| out.push(BoundEntry { side: "upper", name: name.into(), value: v });
    let crrr = upper_bound(UpperBoundKind::CrrrRange, q)?;
    up("crrr_low", crrr.lower());
    up("crrr_high", crrr.upper());
    up("switch_perfect", upper_bound(UpperBoundKind::SwitchPerfect, q)?.upper());
    up("mixture_perfect", upper_bound(UpperBoundKind::MixturePerfect, q)?.upper());
    if q.rho.is_some() {
        up("noisy_switch", upper_bound(UpperBoundKind::NoisySwitch, q)?.upper());
        up("noisy_switch_precise", upper_bound(UpperBoundKind::NoisySwitchPrecise, q)?.upper());
        if q.lambda.is_some() {
            up("preferential", upper_bound(UpperBoundKind::Preferential, q)?.upper());
        }
    }
    let mut low = |name: &str, v: f64| out.push(BoundEntry { side: "lower", name: name.into(), value: v });
    low("exponential_finite", lower_bound(LowerBoundKind::ExponentialFinite, q, None)?);
    low(
        "exponential_asymptotic",
        lower_bound(LowerBoundKind::AsymptoticGeneric, q, Some(&PhiFamily::Exp))?,
    );
    low("heavy_tail_asymptotic", lower_bound(LowerBoundKind::HeavyTailAsymptotic, q, None)?);
    Ok(out)
}

pub fn write_report_csv<W: Write>(entries: &[BoundEntry], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for e in entries {
        w.serialize(e)?;
    }
    w.flush()?;
    Ok(())
}

/// Bound curves against `w = B/n` for a fixed `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsTableSpec {
    pub name: String,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsTable {
    pub w: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl BoundsTableSpec {
    pub fn build(&self) -> Result<BoundsTable> {
        let n = self.n;
        let mut w = Vec::with_capacity(n + 1);
        let names = [
            "lower_exponential_asymptotic",
            "lower_heavy_tail_asymptotic",
            "upper_crrr",
            "upper_switch",
        ];
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
        for b in 0..=n {
            let q = BoundQuery::new(n, b);
            w.push(b as f64 / n as f64);
            cols[0].push(lower_bound(LowerBoundKind::AsymptoticGeneric, &q, Some(&PhiFamily::Exp))?);
            cols[1].push(lower_bound(LowerBoundKind::HeavyTailAsymptotic, &q, None)?);
            cols[2].push(upper_bound(UpperBoundKind::CrrrRange, &q)?.upper());
            cols[3].push(upper_bound(UpperBoundKind::SwitchPerfect, &q)?.upper());
        }
        Ok(BoundsTable {
            w,
            columns: names.iter().map(|s| s.to_string()).zip(cols).collect(),
        })
    }
}

impl BoundsTable {
    pub fn series(&self) -> Vec<Series> {
        self.columns
            .iter()
            .map(|(name, v)| Series::new(name.clone(), self.w.iter().copied().zip(v.iter().copied()).collect()))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["w".to_string()];
        header.extend(self.columns.iter().map(|(n, _)| n.clone()));
        w.write_record(&header)?;
        for (i, x) in self.w.iter().enumerate() {
            let mut rec = vec![x.to_string()];
            rec.extend(self.columns.iter().map(|(_, v)| v[i].to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
