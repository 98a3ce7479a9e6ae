//! The chain potential → spectrum → roots → abelian integral → frequencies.

use crate::abelian::Abelian;
use crate::error::Result;
use crate::frequencies::Frequencies;
use crate::potential::Potential;
use crate::roots_products::RootContext;
use crate::spectrum::{locate_spectrum_with, SpectralData};
use crate::zs_core::ZsSolver;
use std::sync::Arc;

pub struct Pipeline {
    pub solver: Arc<ZsSolver>,
    pub sd: Arc<SpectralData>,
    pub ctx: Arc<RootContext>,
    pub ab: Arc<Abelian>,
}

impl Pipeline {
    /// Locates the spectrum on `−N..=N`; `m` is the product tail index
    /// (default [`RootContext::default_tail`]).
    pub fn new(phi: &Potential, n_max: usize, m: Option<usize>, tol: f64) -> Result<Self> {
        let solver = Arc::new(ZsSolver::new(phi));
        let sd = Arc::new(locate_spectrum_with(&solver, n_max, tol)?);
        let ctx = Arc::new(RootContext::new(sd.clone(), m.unwrap_or_else(|| RootContext::default_tail(n_max)))?);
        let ab = Arc::new(Abelian::new(ctx.clone(), Some(solver.clone())));
        Ok(Pipeline { solver, sd, ctx, ab })
    }

    /// Contours of all open gaps, converged to `tol`.
    pub fn frequencies(&self, tol: f64) -> Result<Frequencies> {
        Frequencies::new(self.ab.clone(), tol)
    }
}
