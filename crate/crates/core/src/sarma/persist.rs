use std::collections::BTreeMap;

use super::fit::FittedSarma;
use super::{AnnualMode, SarmaOrders, SarmaParams};
use crate::calendar::SeasonalGrid;
use crate::error::{Error, Result};
use crate::params_doc::{content_hash, ParamDocument};

/// Parameter document for a fitted model trained on `training`.
pub fn to_document(model: &str, fitted: &FittedSarma, grid: &SeasonalGrid, training: &[f64]) -> ParamDocument {
    let p = &fitted.params;
    let mut values = BTreeMap::new();
    values.insert(
        "orders".to_string(),
        fitted.orders.as_array().iter().map(|&o| o as f64).collect(),
    );
    values.insert("c".to_string(), vec![p.c]);
    for (name, coefs) in p.groups() {
        values.insert(name.to_string(), coefs.clone());
    }
    values.insert("sigma2".to_string(), vec![p.sigma2_normal, p.sigma2_special]);
    values.insert("log_likelihood".to_string(), vec![fitted.log_likelihood]);
    if let Some(se) = &fitted.std_errors {
        values.insert("se_c".to_string(), vec![se.c]);
        for (name, coefs) in se.groups() {
            values.insert(format!("se_{name}"), coefs.clone());
        }
    }
    let mode = match fitted.mode {
        AnnualMode::Switched => "switched",
        AnnualMode::Shared => "shared",
    };
    ParamDocument {
        model: model.to_string(),
        periods_per_day: grid.periods_per_day,
        series_start: grid.series_start,
        training_hash: content_hash(training),
        training_periods: training.len(),
        settings: BTreeMap::from([("annual_mode".to_string(), mode.to_string())]),
        values,
    }
}

/// Orders, annual mode and parameters stored in a document.
pub fn from_document(doc: &ParamDocument) -> Result<(SarmaOrders, AnnualMode, SarmaParams)> {
    let o = doc.list("orders")?;
    if o.len() != 7 || o.iter().any(|x| x.fract() != 0.0 || *x < 0.0) {
        return Err(Error::Config(format!("`orders` must hold 7 non-negative integers, found {o:?}")));
    }
    let orders = SarmaOrders::new(
        o[0] as usize,
        o[1] as usize,
        o[2] as usize,
        o[3] as usize,
        o[4] as usize,
        o[5] as usize,
        o[6] as usize,
    )?;
    let mode = match doc.settings.get("annual_mode").map(String::as_str) {
        None | Some("switched") => AnnualMode::Switched,
        Some("shared") => AnnualMode::Shared,
        Some(other) => return Err(Error::Config(format!("unknown annual_mode `{other}`"))),
    };
    let mut p = SarmaParams::zeros(&orders);
    p.c = doc.scalar("c")?;
    let names: Vec<&'static str> = p.groups().iter().map(|(n, _)| *n).collect();
    for (name, slot) in names.into_iter().zip(p.groups_mut()) {
        *slot = doc.list(name)?.to_vec();
    }
    match doc.list("sigma2")? {
        [n, s] => {
            p.sigma2_normal = *n;
            p.sigma2_special = *s;
        }
        other => return Err(Error::Config(format!("`sigma2` should hold 2 values, found {}", other.len()))),
    }
    p.validate(&orders).map_err(|e| Error::Config(e.to_string()))?;
    Ok((orders, mode, p))
}
