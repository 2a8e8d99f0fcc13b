//! Comparator forecasters: a VAR on the raw term yields and the dynamic
//! Nelson-Siegel model (daily factor extraction plus a VAR on the factors).

mod nelson_siegel;
mod var;

pub use nelson_siegel::{
    default_lambda_grid, extract_ns_factors, extract_ns_factors_at, forecast_dns, select_lambda, NsFactorSeries,
    NsProjector,
};
pub use var::{bic, fit_var, forecast_var, min_observations, select_order, VarModel};
