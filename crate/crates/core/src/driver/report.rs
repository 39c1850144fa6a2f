//! Error norms and convergence tables.

/// Discrete error norms over the computational nodes of a grid with
/// spacing `h`: `l_inf = max|e|`, `l_2 = sqrt(h² Σ e²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l_inf: f64,
    pub l_2: f64,
}

impl ErrorNorms {
    pub fn from_errors(errors: impl IntoIterator<Item = f64>, h: f64) -> Self {
        let (mut l_inf, mut sum) = (0.0f64, 0.0);
        for e in errors {
            l_inf = l_inf.max(e.abs());
            sum += e * e;
        }
        Self {
            l_inf,
            l_2: (h * h * sum).sqrt(),
        }
    }
}

/// One row of a convergence table. Orders are filled in against the
/// previous row by [`fill_orders`].
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub label: String,
    pub n: usize,
    pub h: f64,
    pub l_inf: f64,
    pub l_2: f64,
    pub order_inf: Option<f64>,
    pub order_2: Option<f64>,
}

impl ErrorReport {
    pub fn new(label: impl Into<String>, n: usize, h: f64, norms: ErrorNorms) -> Self {
        Self {
            label: label.into(),
            n,
            h,
            l_inf: norms.l_inf,
            l_2: norms.l_2,
            order_inf: None,
            order_2: None,
        }
    }
}

/// Observed order between two resolutions; `log2(e_coarse/e_fine)` when
/// the spacing halves.
pub fn order(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}

pub fn fill_orders(rows: &mut [ErrorReport]) {
    for i in 1..rows.len() {
        let (a, b) = (&rows[i - 1], &rows[i]);
        let oi = order(a.l_inf, b.l_inf, a.h, b.h);
        let o2 = order(a.l_2, b.l_2, a.h, b.h);
        rows[i].order_inf = Some(oi);
        rows[i].order_2 = Some(o2);
    }
}

/// Least-squares slope of `ln e` against `ln h`.
pub fn fitted_slope(hs: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

/// Table rows in the `resolution,l_inf,order_inf,l_2,order_2` layout.
pub fn table_rows(rows: &[ErrorReport]) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let fmt_order = |o: Option<f64>| o.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
    let header = vec!["resolution", "l_inf", "order_inf", "l_2", "order_2"];
    let body = rows
        .iter()
        .map(|r| {
            vec![
                r.label.clone(),
                format!("{:.4e}", r.l_inf),
                fmt_order(r.order_inf),
                format!("{:.4e}", r.l_2),
                fmt_order(r.order_2),
            ]
        })
        .collect();
    (header, body)
}
