//! Wave models of option prices.
//!
//! Black-Scholes curves serve as targets. They are modelled by closed-form
//! solutions of an adaptive nonlinear Schrodinger equation, by coupled
//! volatility/price solitons and by linear de Broglie wave packets. A split-step
//! Fourier propagator and finite-difference residuals check the closed forms
//! independently, and a Levenberg-Marquardt harness fits the model densities
//! to the target curves.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases fix the scalar to `f64`.

pub mod black_scholes;
pub mod error;
pub mod fitting;
pub mod io;
pub mod manakov;
pub mod market;
pub mod nls;
pub mod propagator;
pub mod quantum;
pub mod real;
pub mod special;
pub mod spectral;

pub use black_scholes::{
    bs_curve, bs_greeks, bs_price, d1_d2, parity_gap, GreeksReport, OptionKind,
};
pub use error::{Error, Result};
pub use manakov::{
    collision_initial_condition, count_separated_peaks, manakov_soliton, CollisionScenario,
    ManakovState, ManakovSystem, SolitonSpec,
};
pub use market::{
    make_grid, sample_terminal_prices, simulate_gbm, GbmPath, OptionParams, SpatialGrid, WaveField,
};
pub use nls::{beta, BetaSource, NlsParams, Solution, WeightRow, WeightSet};
pub use propagator::{
    conserved_quantities, pde_residual, sample_surface, split_step_evolve, BetaProfile,
    ConservedReport, EquationKind, EvolutionSpec, EvolutionState, Frame, ResidualEquation,
    ResidualNorms, Surface,
};
pub use quantum::{
    dispersion, expectations, fourier_propagate, gaussian_packet, plane_wave, quantum_greeks,
    wave_packet, BoundaryPolicy, GaussianPacketSpec, PlaneWave, PlaneWaveBasis, QuantumGreeks,
};
pub use real::{Real, SpectralReal};
pub use special::{
    elliptic_k, erf, erfc, jacobi_cn, jacobi_sn, jacobi_sn_cn_dn, std_normal_cdf, EllipticModulus,
};

pub type SpatialGrid64 = SpatialGrid<f64>;
pub type SpatialGrid32 = SpatialGrid<f32>;
pub type WaveField64 = WaveField<f64>;
pub type WaveField32 = WaveField<f32>;
pub type OptionParams64 = OptionParams<f64>;
pub type NlsParams64 = NlsParams<f64>;
pub type PlaneWaveBasis64 = PlaneWaveBasis<f64>;
pub type ManakovState64 = ManakovState<f64>;
pub type SolitonSpec64 = SolitonSpec<f64>;
pub type EvolutionSpec64 = EvolutionSpec<f64>;
pub type Complex64 = num_complex::Complex<f64>;
