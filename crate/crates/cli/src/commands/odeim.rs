use clap::{Args, Subcommand};
use qqsys::operkit::{bae_ratio_check, RatioReport};
use qqsys::{QFunction, QOptions, XOper};
use serde_json::json;

use super::{cx, Cx};
use crate::report::{num, Report, Table};
use crate::{parse, CliError, Ctx};

#[derive(Debug, Subcommand)]
pub enum OdeimCmd {
    /// Zeros and samples of Q(E) for `−ψ″ + (x^{2α} + ℓ(ℓ+1)/x²)ψ = Eψ`.
    Q(QArgs),
}

#[derive(Debug, Args)]
pub struct QArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub ell: f64,
    /// Scan for zeros on `[0, emax]`.
    #[arg(long, default_value_t = 40.0)]
    pub emax: f64,
    /// Number of zeros requested.
    #[arg(long, default_value_t = 5)]
    pub zeros: usize,
    /// Evaluate the Bethe ratios `Q(q⁻²E_k)/Q(q²E_k)` at the zeros.
    #[arg(long)]
    pub check_ratio: bool,
    /// `auto` for `1/(α+1)`, or a number.
    #[arg(long, default_value = "auto")]
    pub beta2: String,
    /// Largest accepted `max_k |R_k/R_1 − 1|`.
    #[arg(long, default_value_t = 1e-3)]
    pub ratio_tol: f64,
    /// Extra sample points, comma separated complex literals.
    #[arg(long, allow_hyphen_values = true)]
    pub samples: Option<String>,
    #[arg(long, default_value_t = 1e-11)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub x_min: f64,
    /// Outer matching point [default: scaled with α and |E|].
    #[arg(long)]
    pub x_max: Option<f64>,
}

fn ratio_json(r: &RatioReport) -> serde_json::Value {
    json!({
        "beta2": r.beta2,
        "q": Cx::from(r.q),
        "zeros": r.zeros,
        "ratios": cx(&r.ratios),
        "spread": r.spread,
        "control_spread": r.control_spread,
        "predicted": Cx::from(r.predicted),
    })
}

pub fn run(cmd: &OdeimCmd, _ctx: &Ctx) -> Result<Report, CliError> {
    let OdeimCmd::Q(a) = cmd;
    for (name, v) in [("rtol", a.rtol), ("x-min", a.x_min), ("emax", a.emax)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CliError::usage(format!("--{name} must be positive")));
        }
    }
    let op = XOper::new(a.alpha, a.ell)?;
    let opts = QOptions {
        rtol: a.rtol,
        x_min: a.x_min,
        x_max: a.x_max,
        ..QOptions::default()
    };
    let beta2 = match a.beta2.trim() {
        "auto" => None,
        s => Some(
            s.parse::<f64>()
                .map_err(|_| CliError::usage(format!("bad --beta2 {s:?}")))?,
        ),
    };
    let samples = match &a.samples {
        Some(s) => parse::complex_list(s)?,
        None => Vec::new(),
    };
    let mut qf = QFunction::new(op, opts);
    let zeros = if a.zeros > 0 {
        qf.find_zeros(a.emax, a.zeros)?.to_vec()
    } else {
        Vec::new()
    };
    let ratio = if a.check_ratio {
        Some(bae_ratio_check(&qf, beta2)?)
    } else {
        None
    };
    let sample_vals: Vec<_> = qf
        .eval_many(&samples)
        .into_iter()
        .collect::<qqsys::Result<_>>()?;
    let zero_es: Vec<_> = zeros.iter().map(|z| num_complex::Complex::new(z.e, 0.0)).collect();
    let zero_vals: Vec<_> = qf
        .eval_many(&zero_es)
        .into_iter()
        .collect::<qqsys::Result<_>>()?;

    let mut table = Table::new(&["kind", "E", "re_q", "im_q"]);
    for (z, v) in zero_es.iter().zip(&zero_vals) {
        table.push(vec!["zero".into(), num(z.re), num(v.re), num(v.im)]);
    }
    for (e, v) in samples.iter().zip(&sample_vals) {
        let e_txt = if e.im == 0.0 {
            num(e.re)
        } else {
            format!("{}{:+}i", num(e.re), e.im)
        };
        table.push(vec!["sample".into(), e_txt, num(v.re), num(v.im)]);
    }

    let result = json!({
        "alpha": a.alpha,
        "ell": a.ell,
        "emax": a.emax,
        "resonant": op.resonant(),
        "normalization": qf.normalization(),
        "zeros": zeros,
        "warnings": qf.warnings,
        "samples": samples.iter().zip(&sample_vals).map(|(e, v)| json!({"E": Cx::from(*e), "q": Cx::from(*v)})).collect::<Vec<_>>(),
        "ratio": ratio.as_ref().map(ratio_json),
    });
    let mut rep = Report::new("odeim q", true, result).with_table(table);
    if zeros.len() < a.zeros {
        rep.fail(format!(
            "found {} of {} zeros below E = {}",
            zeros.len(),
            a.zeros,
            a.emax
        ));
    }
    if let Some(r) = &ratio {
        if !(r.spread < a.ratio_tol) {
            rep.fail(format!(
                "ratio spread {:.3e} above {:.1e}",
                r.spread, a.ratio_tol
            ));
        }
    }
    Ok(rep)
}
