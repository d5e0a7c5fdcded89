use optwave::fitting::{reproduce_paper_fit, LmOptions, ReproCase};
use optwave::*;

fn main() -> Result<()> {
    let p = OptionParams64::reference();
    let call = bs_price(100.0, &p, OptionKind::Call)?;
    println!("reference call {call:.4}");

    let grid = SpatialGrid64::periodic(-64.0, 128.0, 1024)?;
    let nls = NlsParams::new(1.0, 1.0, 1.0, BetaSource::Constant(1.0))?;
    let psi = WaveField::try_from_fn(grid, 0.0, |s| nls::psi_soliton(s, 0.0, &nls))?;
    let spec = EvolutionSpec::new(
        EquationKind::Nls {
            sigma: 1.0,
            beta: BetaProfile::Constant(1.0),
        },
        1e-3,
        1.0,
    );
    let frames = split_step_evolve(psi, &spec)?;
    println!(
        "{} frames, t = {}",
        frames.len(),
        frames.last().unwrap().time()
    );

    let report = reproduce_paper_fit(ReproCase::PacketPutN7, &LmOptions::default())?;
    println!("put n=7 rmse {} -> {}", report.start_rmse, report.fit.rmse);
    Ok(())
}
