use std::sync::Arc;

use anyhow::Result;
use coincidence_core::rng::Rng;
use coincidence_core::singleparticle::{FieldVector, LocalizationFrame, ModeBasis, TSpectrum};
use rand::Rng as _;

use crate::config::ExperimentConfig;

/// The momentum grid and localization frame of a configuration.
pub struct Model {
    pub basis: Arc<ModeBasis>,
    pub frame: Arc<LocalizationFrame>,
    pub kappa: f64,
}

impl Model {
    pub fn build(config: &ExperimentConfig) -> Result<Self> {
        let m = &config.model;
        let basis = ModeBasis::shared(m.mass, m.p_max, m.n_modes)?;
        let frame = Arc::new(LocalizationFrame::build(&basis, m.radius, m.n_test)?);
        Ok(Model {
            basis,
            frame,
            kappa: m.kappa,
        })
    }
}

pub fn spectrum(model: &Model, energy: f64) -> Result<Arc<TSpectrum>> {
    Ok(Arc::new(TSpectrum::build(&model.frame, energy, model.kappa)?))
}

/// Frame symbol with coordinates uniform in `[-scale, scale]`.
pub fn random_symbol(frame: &LocalizationFrame, rng: &mut Rng, scale: f64) -> Result<FieldVector> {
    let n = frame.n_test();
    let mut draw = || (0..n).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect::<Vec<_>>();
    let plus = draw();
    let minus = draw();
    Ok(frame.symbol(&plus, &minus)?)
}
