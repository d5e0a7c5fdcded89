//! Curve fitting: a Levenberg-Marquardt driver and the harnesses that fit
//! NLS and wave-packet densities to option price curves.

pub mod harness;
pub mod lm;

pub use harness::{
    default_grid, fit_blend_from_shock, fit_nls_best, fit_nls_to_bs, fit_packet_to_bs, locate_kink,
    nls_start_list, packet_curve, published_packet_rmse, reproduce_paper_fit, KinkReport,
    NlsFitConfig, NlsModel, NlsObjective, PacketObjective, ReproCase, ReproReport, Target,
    NLS_ROWS,
};
pub use lm::{
    finite_difference_jacobian, levenberg_marquardt, rmse, FitResult, LmOptions, Matrix, Objective,
    Termination,
};
