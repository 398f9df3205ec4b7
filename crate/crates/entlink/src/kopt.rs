//! Optimal distillation depth. The total rate r(k) = r_ent(k) * r_proc(k)
//! trades pair yield against pair quality; this module locates the first
//! local maximum k_loc of that curve, bounds how far beyond it a global
//! maximum could hide, and searches exactly that window.

use std::io::Write;

use crate::distill::{trajectory, DistillationTrajectory, ProtocolKind};
use crate::error::{Error, Result};
use crate::quantum::werner_from_fidelity;
use crate::strategy::{
    asymmetric_optimal_rate, processing_rate, symmetric_rate_best, BasisSchedule, StrategyKind,
};

/// Hard cap on how far the kappa search may extend a curve.
const KAPPA_SEARCH_CAP: u32 = 128;

/// How the CHSH sift fraction behaves as distillation deepens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaMode {
    /// eta is a fixed fraction of the measured pairs, independent of k.
    Fixed(f64),
    /// eta(k) = eta0 / r_ent(k): the CHSH budget is pinned to the number
    /// of surviving pairs. Depths where eta(k) leaves (0, 0.25) are
    /// rejected and contribute zero rate.
    Scaled(f64),
}

impl EtaMode {
    pub fn eta0(&self) -> f64 {
        match self {
            EtaMode::Fixed(e) | EtaMode::Scaled(e) => *e,
        }
    }

    /// Effective eta at a point with the given distillation yield, or
    /// None when it leaves the valid interval.
    pub fn eta_at(&self, ent_rate: f64) -> Option<f64> {
        let eta = match self {
            EtaMode::Fixed(e) => *e,
            EtaMode::Scaled(e) => e / ent_rate,
        };
        (eta > 0.0 && eta < 0.25).then_some(eta)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            EtaMode::Fixed(_) => "fixed",
            EtaMode::Scaled(_) => "scaled",
        }
    }
}

/// One point of the composed rate curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub k: u32,
    pub r_ent: f64,
    pub r_proc: f64,
    pub r_total: f64,
}

/// Processing rate of the twirled state of the given fidelity under the
/// chosen strategy.
fn strategy_rate(fidelity: f64, eta: f64, strategy: &StrategyKind) -> Result<f64> {
    // Post-distillation fidelities live in [0.25, 1]; clamp rounding.
    let f = fidelity.clamp(0.25, 1.0);
    match strategy {
        StrategyKind::AsymmetricOptimal => asymmetric_optimal_rate(f, eta),
        StrategyKind::Symmetric => symmetric_rate_best(f, eta),
        StrategyKind::Custom(s) => {
            let schedule = BasisSchedule::new(eta, s.gamma(), s.basis_a(3), s.basis_b(3))?;
            Ok(processing_rate(&werner_from_fidelity(f)?, &schedule).total)
        }
    }
}

/// Lazily extended rate curve over k for one configuration.
struct CurveBuilder {
    protocol: ProtocolKind,
    strategy: StrategyKind,
    eta_mode: EtaMode,
    trajectory: DistillationTrajectory,
    points: Vec<RatePoint>,
}

impl CurveBuilder {
    fn new(
        f0: f64,
        protocol: ProtocolKind,
        strategy: StrategyKind,
        eta_mode: EtaMode,
    ) -> Result<Self> {
        if eta_mode.eta0() <= 0.0 || eta_mode.eta0() >= 0.25 {
            return Err(Error::EtaOutOfRange(eta_mode.eta0()));
        }
        let mut builder = Self {
            protocol,
            strategy,
            eta_mode,
            trajectory: trajectory(f0, 0, protocol)?,
            points: Vec::new(),
        };
        builder.push_point()?;
        Ok(builder)
    }

    fn push_point(&mut self) -> Result<()> {
        let k = self.points.len() as u32;
        let r_ent = self.trajectory.ent_rate();
        let fidelity = self.trajectory.final_state().fidelity();
        let r_proc = match self.eta_mode.eta_at(r_ent) {
            Some(eta) => strategy_rate(fidelity, eta, &self.strategy)?,
            None => 0.0,
        };
        self.points.push(RatePoint {
            k,
            r_ent,
            r_proc,
            r_total: r_ent * r_proc,
        });
        Ok(())
    }

    fn ensure(&mut self, k: u32) -> Result<()> {
        while (self.points.len() as u32) <= k {
            self.trajectory.extend(self.protocol)?;
            self.push_point()?;
        }
        Ok(())
    }

    fn point(&self, k: u32) -> RatePoint {
        self.points[k as usize]
    }

    fn r(&self, k: u32) -> f64 {
        self.points[k as usize].r_total
    }

    /// Success probability of the step consuming state k.
    fn p_ent(&self, k: u32) -> f64 {
        self.trajectory.success_probabilities()[k as usize]
    }

    /// Upper bound 1 - 4 eta(k) on any processing rate at depth k; never
    /// positive when eta(k) is out of range.
    fn proc_bound(&self, k: u32) -> f64 {
        let r_ent = self.points[k as usize].r_ent;
        match self.eta_mode.eta_at(r_ent) {
            Some(eta) => 1.0 - 4.0 * eta,
            None => 0.0,
        }
    }
}

/// Total rate r(k) = r_ent(k) * r_proc(k) of a single depth. Under
/// scaled eta the call fails where eta(k) leaves its domain.
pub fn total_rate(
    k: u32,
    f0: f64,
    protocol: ProtocolKind,
    strategy: &StrategyKind,
    eta_mode: EtaMode,
) -> Result<f64> {
    if eta_mode.eta0() <= 0.0 || eta_mode.eta0() >= 0.25 {
        return Err(Error::EtaOutOfRange(eta_mode.eta0()));
    }
    let t = trajectory(f0, k, protocol)?;
    let r_ent = t.ent_rate();
    let eta = eta_mode.eta_at(r_ent).ok_or(Error::ScaledEtaOutOfRange {
        eta: eta_mode.eta0() / r_ent,
        k,
    })?;
    Ok(r_ent * strategy_rate(t.final_state().fidelity(), eta, strategy)?)
}

/// The full rate curve for k in [0, k_max]. Depths rejected by a scaled
/// eta contribute zero rate instead of failing, which is how the search
/// routines see the curve.
pub fn rate_curve(
    f0: f64,
    protocol: ProtocolKind,
    strategy: &StrategyKind,
    eta_mode: EtaMode,
    k_max: u32,
) -> Result<Vec<RatePoint>> {
    let mut curve = CurveBuilder::new(f0, protocol, strategy.clone(), eta_mode)?;
    curve.ensure(k_max)?;
    Ok(curve.points)
}

/// Location of the first descent of the rate curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KLocOutcome {
    pub k_loc: u32,
    /// No descent was found up to k_max; k_loc saturated there.
    pub saturated: bool,
    /// The curve is identically zero up to k_max.
    pub no_key: bool,
}

fn scan_k_loc(curve: &mut CurveBuilder, k_max: u32) -> Result<KLocOutcome> {
    curve.ensure(k_max)?;
    if (0..=k_max).all(|k| curve.r(k) == 0.0) {
        return Ok(KLocOutcome {
            k_loc: 0,
            saturated: false,
            no_key: true,
        });
    }
    for k in 0..k_max {
        if curve.r(k + 1) < curve.r(k) {
            return Ok(KLocOutcome {
                k_loc: k,
                saturated: false,
                no_key: false,
            });
        }
    }
    Ok(KLocOutcome {
        k_loc: k_max,
        saturated: true,
        no_key: false,
    })
}

/// Smallest k whose successor strictly decreases the rate. Zero
/// plateaus never fire the descent test, so the scan naturally lands on
/// the first strictly positive arc.
pub fn find_k_loc(
    f0: f64,
    protocol: ProtocolKind,
    strategy: &StrategyKind,
    eta_mode: EtaMode,
    k_max: u32,
) -> Result<KLocOutcome> {
    let mut curve = CurveBuilder::new(f0, protocol, strategy.clone(), eta_mode)?;
    scan_k_loc(&mut curve, k_max)
}

/// The search-window bounds around k_loc.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KappaBounds {
    pub kappa1: u32,
    pub kappa2: u32,
    /// min(kappa1, kappa2) - 1; a window of 1 pins the optimum to k_loc.
    pub kappa: u32,
}

fn compute_kappa(curve: &mut CurveBuilder, k_loc: u32) -> Result<KappaBounds> {
    if curve.r(k_loc) == 0.0 {
        return Err(Error::DegenerateRateCurve);
    }
    let r_proc_loc = curve.point(k_loc).r_proc;
    let r_loc = curve.r(k_loc);

    // First kappa where doubling the processing rate per step cannot
    // keep up with the success probabilities spent to get there.
    let mut kappa1 = None;
    let mut lhs = r_proc_loc;
    for kappa in 1..=KAPPA_SEARCH_CAP {
        curve.ensure(k_loc + kappa)?;
        lhs *= 2.0 / curve.p_ent(k_loc + kappa - 1);
        if lhs > curve.proc_bound(k_loc + kappa) {
            kappa1 = Some(kappa);
            break;
        }
    }
    // First kappa where the yield alone falls below the rate at k_loc.
    let mut kappa2 = None;
    for kappa in 1..=KAPPA_SEARCH_CAP {
        curve.ensure(k_loc + kappa)?;
        if curve.point(k_loc + kappa).r_ent < r_loc {
            kappa2 = Some(kappa);
            break;
        }
    }
    let (kappa1, kappa2) = match (kappa1, kappa2) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::DegenerateRateCurve),
    };
    Ok(KappaBounds {
        kappa1,
        kappa2,
        kappa: kappa1.min(kappa2) - 1,
    })
}

/// Window bounds for the given local maximum.
pub fn kappa_bounds(
    k_loc: u32,
    f0: f64,
    protocol: ProtocolKind,
    strategy: &StrategyKind,
    eta_mode: EtaMode,
) -> Result<KappaBounds> {
    let mut curve = CurveBuilder::new(f0, protocol, strategy.clone(), eta_mode)?;
    curve.ensure(k_loc)?;
    compute_kappa(&mut curve, k_loc)
}

/// Outcome of the bounded search for the optimal depth.
#[derive(Debug, Clone, PartialEq)]
pub struct KOptResult {
    pub k_loc: u32,
    pub kappa1: u32,
    pub kappa2: u32,
    pub kappa: u32,
    pub k_opt: u32,
    /// r(k_opt).
    pub rate: f64,
    /// The curve over every evaluated depth, from k = 0 upward.
    pub rate_curve: Vec<RatePoint>,
    pub eta_mode: EtaMode,
    pub no_key: bool,
    pub saturated: bool,
}

/// Finds the depth maximizing r(k). The candidates are k_loc itself and
/// the window (k_loc + 1, k_loc + kappa]; k_loc + 1 is excluded because
/// it already lost to k_loc. Ties resolve to the smallest depth, which
/// costs the fewest quantum operations.
pub fn find_k_opt(
    f0: f64,
    protocol: ProtocolKind,
    strategy: &StrategyKind,
    eta_mode: EtaMode,
    k_max: u32,
) -> Result<KOptResult> {
    let mut curve = CurveBuilder::new(f0, protocol, strategy.clone(), eta_mode)?;
    let loc = scan_k_loc(&mut curve, k_max)?;
    if loc.no_key {
        return Ok(KOptResult {
            k_loc: 0,
            kappa1: 0,
            kappa2: 0,
            kappa: 0,
            k_opt: 0,
            rate: 0.0,
            rate_curve: curve.points.clone(),
            eta_mode,
            no_key: true,
            saturated: false,
        });
    }
    if loc.saturated {
        // The descent never fired; fall back to the computed prefix.
        let k_opt = (0..=k_max)
            .max_by(|&a, &b| curve.r(a).partial_cmp(&curve.r(b)).unwrap().then(b.cmp(&a)));
        let k_opt = k_opt.unwrap_or(0);
        return Ok(KOptResult {
            k_loc: k_max,
            kappa1: 0,
            kappa2: 0,
            kappa: 0,
            k_opt,
            rate: curve.r(k_opt),
            rate_curve: curve.points.clone(),
            eta_mode,
            no_key: false,
            saturated: true,
        });
    }

    let bounds = compute_kappa(&mut curve, loc.k_loc)?;
    let mut k_opt = loc.k_loc;
    let mut best = curve.r(loc.k_loc);
    for k in (loc.k_loc + 2)..=(loc.k_loc + bounds.kappa) {
        curve.ensure(k)?;
        if curve.r(k) > best {
            best = curve.r(k);
            k_opt = k;
        }
    }
    Ok(KOptResult {
        k_loc: loc.k_loc,
        kappa1: bounds.kappa1,
        kappa2: bounds.kappa2,
        kappa: bounds.kappa,
        k_opt,
        rate: best,
        rate_curve: curve.points.clone(),
        eta_mode,
        no_key: false,
        saturated: false,
    })
}

/// Serializes a rate curve as CSV with header `k,r_ent,r_proc,r_total`.
pub fn write_curve_csv<W: Write>(curve: &[RatePoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "k,r_ent,r_proc,r_total")?;
    for p in curve {
        writeln!(
            out,
            "{},{},{},{}",
            p.k,
            crate::csv_number(p.r_ent),
            crate::csv_number(p.r_proc),
            crate::csv_number(p.r_total)
        )?;
    }
    Ok(())
}

pub fn summary_header() -> &'static str {
    "k_loc,kappa1,kappa2,kappa,k_opt,rate"
}

pub fn summary_values(result: &KOptResult) -> String {
    format!(
        "{},{},{},{},{},{}",
        result.k_loc,
        result.kappa1,
        result.kappa2,
        result.kappa,
        result.k_opt,
        crate::csv_number(result.rate)
    )
}
